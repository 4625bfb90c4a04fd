#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annealab/grid.hpp"
#include "annealab/potential.hpp"
#include "annealab/schedules.hpp"

namespace annealab {

enum class Integrator {
  rk4,         ///< fourth-order Runge-Kutta in the kinetic interaction picture
  split_step,  ///< second-order Strang splitting, unitary by construction
};

Integrator parse_integrator(std::string_view name);
std::string to_string(Integrator integrator);

struct PropagationConfig {
  double dt = 0.1;
  Integrator integrator = Integrator::rk4;
  int observer_stride = 10;  ///< outer steps between records
  /// Each dt is split into substeps so that the kinetic phase of the highest
  /// occupied wavenumber stays below this many radians per substep.
  double max_kinetic_phase = 0.25;
  /// Momentum probability ignored when locating the highest occupied wavenumber.
  double tail_probability = 1e-14;
  double max_norm_drift = 1e-8;
  /// Keep a state copy every `snapshot_every` records (0: none), at most
  /// `snapshot_capacity` of them, oldest dropped first.
  int snapshot_every = 0;
  int snapshot_capacity = 64;

  void validate() const;
};

struct Snapshot {
  double time = 0.0;
  Wavefunction state;
};

struct Trajectory {
  explicit Trajectory(const Grid& grid) : final_state(grid) {}

  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;  ///< <psi|H(t)|psi>
  std::vector<double> width;   ///< <x^2>
  std::vector<double> x0;      ///< position of the extremal current at x < 0
  std::vector<double> j0;      ///< signed current there
  std::vector<double> forbidden_probability;
  std::vector<bool> width_in_forbidden;  ///< sqrt(<x^2>) inside a forbidden interval
  std::vector<Snapshot> snapshots;
  Wavefunction final_state;
  double max_norm_drift = 0.0;
  long long steps = 0;
  long long substeps = 0;
};

/// Advances states under H(t) = p^2/2m(t) + V on a fixed grid.
class Propagator {
 public:
  Propagator(const Grid& grid, const PotentialParams& params, MassSchedule schedule,
             PropagationConfig config = {});

  /// Evolves psi from t0 to t1 (0 <= t0 <= t1 <= T) in steps of at most dt.
  void advance(Wavefunction& psi, double t0, double t1);
  /// One outer step of length h starting at t.
  void step(Wavefunction& psi, double t, double h);

  long long substeps() const { return substeps_; }
  const std::vector<double>& potential() const { return potential_; }

 private:
  void outer_step(Wavefunction& psi, double t, double h);
  int substep_count(const Wavefunction& psi, double t, double h);
  void kinetic_factor(double theta, ComplexVector& out) const;
  void apply_kinetic_factor(ComplexVector& psi, const ComplexVector& factor);
  void nonlinear(const ComplexVector& in, ComplexVector& out) const;

  Grid grid_;
  PotentialParams params_;
  MassSchedule schedule_;
  PropagationConfig config_;
  std::vector<double> potential_;
  double v_min_ = 0.0;
  double v_max_ = 0.0;
  double shift_ = 0.0;
  long long outer_steps_ = 0;
  long long substeps_ = 0;
  double cached_half_step_ = -1.0;
  ComplexVector a_, b_, c_, d_, half1_, half2_, potential_half_, scratch_;
};

/// Runs the anneal from t = 0 to T, recording observables at t = 0, every
/// observer_stride steps and at t = T. Throws PropagationError on norm drift
/// beyond config.max_norm_drift or non-finite amplitudes.
Trajectory propagate(const Grid& grid, const PotentialParams& params, const MassSchedule& schedule,
                     const Wavefunction& psi0, const PropagationConfig& config = {});

double energy_expectation(const Wavefunction& psi, const PotentialParams& params, double mass);
double energy_expectation(const Wavefunction& psi, std::span<const double> potential, double mass);

/// <psi(T)|H(T)|psi(T)> - E0(m_f), with E0 solved on the trajectory's grid.
double residual_energy_qa(const Trajectory& trajectory, const PotentialParams& params,
                          double m_final, const Grid& grid);

struct CurrentField {
  Grid grid;
  std::vector<double> values;
  double mass = 0.0;
};

/// j = (1/m) Im(psi* dpsi/dx) with a spectral derivative (hbar = 1).
CurrentField probability_current(const Wavefunction& psi, double mass);

struct CurrentAmplitude {
  double x0 = 0.0;
  double j0 = 0.0;
};

/// Extremal |j| over grid points with x < 0; ties go to the smallest x.
CurrentAmplitude current_amplitude(const CurrentField& field);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Maximal intervals where V(x) > energy, with linearly interpolated ends.
std::vector<Interval> forbidden_regions(const Grid& grid, const PotentialParams& params,
                                        double energy);
/// As above with energy = <psi|H(mass)|psi>.
std::vector<Interval> forbidden_regions(const Wavefunction& psi, const PotentialParams& params,
                                        double mass);

/// Integral of the linearly interpolated density over the intervals.
double probability_in(const Wavefunction& psi, const std::vector<Interval>& intervals);

struct TunnelingSample {
  double time = 0.0;
  bool width_in_forbidden = false;
  double forbidden_probability = 0.0;
};

std::vector<TunnelingSample> tunneling_fraction(const Trajectory& trajectory);

}  // namespace annealab
