#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "annealab/fitting.hpp"
#include "annealab/philox.hpp"
#include "annealab/potential.hpp"
#include "annealab/schedules.hpp"

namespace annealab {

/// Equilibrium at inverse temperature beta. The kinetic term is integrated
/// analytically and contributes 1/(2 beta) to U.
struct EquilibriumResult {
  double beta = 0.0;
  double avg_potential = 0.0;    ///< <V>_beta
  double internal_energy = 0.0;  ///< 1/(2 beta) + <V>_beta
  double partition_log = 0.0;    ///< log of the configurational integral of exp(-beta V)
};

/// Half-width beyond which beta V > 46 for every x (so exp(-beta V) < 1e-20).
double boltzmann_support(const PotentialParams& params, double beta);

/// Boltzmann-weighted average of f, by adaptive Gauss-Kronrod on panels of
/// width w0/2 over the support. Relative error target 1e-8; throws
/// ConvergenceError otherwise.
double boltzmann_average(const PotentialParams& params, double beta,
                         const std::function<double(double)>& integrand);

EquilibriumResult equilibrium(const PotentialParams& params, double beta);

/// d log10 <V> / d log10 beta, centered difference with the given step in decades.
double alpha_eq(const PotentialParams& params, double beta, double step_decades = 0.01);

/// Slope of log10 <V> against log10 beta between two temperatures.
double alpha_eq_secant(const PotentialParams& params, double beta_a, double beta_b);

/// n draws from exp(-beta V) by inverse CDF on a 2^16-node trapezoid table.
/// Draw i depends only on (seed, i).
std::vector<double> sample_boltzmann(const PotentialParams& params, double beta, std::size_t n,
                                     std::uint64_t seed);

/// Potential as evaluated inside the Metropolis kernel. Uses a polynomial
/// cosine so the ensemble loop vectorizes; agrees with potential() to ~1e-15.
double kernel_potential(const PotentialParams& params, double x);

/// One Metropolis move from x: proposal x + s (u.first - 1/2), accepted when
/// u.second < exp(-beta [V(x') - V(x)]).
double metropolis_step(double x, const PotentialParams& params, double beta, double s,
                       UniformPair u);

/// Per-particle stream; each call consumes one tick.
struct ParticleStream {
  std::uint64_t seed = 0;
  std::uint64_t particle = 0;
  std::uint64_t tick = 0;

  UniformPair next() { return philox_uniforms(seed, particle, tick++); }
};

double metropolis_step(double x, const PotentialParams& params, double beta, double s,
                       ParticleStream& rng);

inline constexpr double kMetropolisDt = 0.1;
inline constexpr int kSubEnsembles = 10;

struct AnnealOptions {
  double dt = kMetropolisDt;  ///< time per Metropolis tick
  int threads = 1;
  /// Rescale the step per chunk every 100 ticks toward 50% acceptance.
  bool adaptive_step = false;
};

/// Ensemble mean of V at one record time, with the range of the ten
/// sub-ensemble means and the standard error over particles.
struct SeriesPoint {
  double t = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double std_error = 0.0;
};

/// N independent walkers; particle i draws from Philox keyed by (seed, i, tick).
class Ensemble {
 public:
  Ensemble(std::vector<double> positions, std::uint64_t seed, double step_size,
           AnnealOptions options = {});

  std::size_t size() const { return positions_.size(); }
  const std::vector<double>& positions() const { return positions_; }
  double step_size() const { return step_size_; }
  std::uint64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * options_.dt; }

  /// Runs until each record tick (ascending, >= current tick) and returns
  /// the ensemble statistics there. Tick n uses beta(n dt).
  std::vector<SeriesPoint> run(const PotentialParams& params, const BetaSchedule& schedule,
                               const std::vector<std::uint64_t>& record_ticks);

 private:
  std::vector<double> positions_;
  std::vector<double> potentials_;
  std::vector<double> chunk_steps_;
  std::uint64_t seed_;
  double step_size_;
  std::uint64_t tick_ = 0;
  AnnealOptions options_;
  PotentialParams cached_params_{};
  bool potentials_valid_ = false;
};

struct AnnealSeries {
  std::vector<SeriesPoint> points;
  std::size_t particles = 0;
  double step_size = 0.0;
  std::uint64_t seed = 0;
};

/// Samples N walkers from the Boltzmann distribution at beta(0), anneals them
/// under the schedule and records <V> at each requested time (rounded to the
/// tick grid). Time 0 and the schedule end are always recorded for finite
/// schedules.
AnnealSeries anneal_ensemble(const PotentialParams& params, const BetaSchedule& schedule, double s,
                             std::size_t n, std::uint64_t seed,
                             const std::vector<double>& record_times,
                             const AnnealOptions& options = {});

struct ResidualSample {
  double total_time = 0.0;
  double residual = 0.0;
  double lo = 0.0;  ///< smallest sub-ensemble residual
  double hi = 0.0;
  double std_error = 0.0;
};

/// <V> at the last record minus the equilibrium <V> at beta_final.
ResidualSample residual_energy_sa(const AnnealSeries& series, const PotentialParams& params,
                                  double beta_final);

struct LogScheduleResult {
  AnnealSeries series;
  DecayFit fit;  ///< slope of log10 <V> against log10 log10 t
  double beta_final = 0.0;
};

inline constexpr double kLogFitStart = 0.5;  ///< lower edge of the log10 log10 t window

/// Anneals under beta_i log10(t + 10) up to time t_max and fits the decay
/// exponent over log10 log10 t > 0.5. Throws std::invalid_argument when the
/// window holds fewer than three records.
LogScheduleResult log_schedule_run(const PotentialParams& params, double beta_i, double s,
                                   std::size_t n, std::uint64_t seed, double t_max,
                                   const AnnealOptions& options = {});

}  // namespace annealab
