#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "annealab/classical_mc.hpp"
#include "annealab/fitting.hpp"
#include "annealab/potential.hpp"
#include "annealab/quantum_dynamics.hpp"
#include "annealab/schedules.hpp"

namespace annealab {

enum class StageKind { quantum, classical };
std::string to_string(StageKind kind);

/// One boundary of the stage table: a mass (quantum) or inverse temperature
/// (classical) and the energy there, E0(m) or U(beta).
struct BoundaryRow {
  char row = 'a';  ///< 'a'..'d'
  StageKind kind = StageKind::quantum;
  double param = 0.0;
  double energy = 0.0;     ///< recomputed
  double reference = 0.0;  ///< embedded fixture
};

/// Boundary masses 1, 1e3, 1e5, 1e6 and temperatures 10^0.29, 10^1.18,
/// 10^1.97, 10^2.35.
const std::vector<BoundaryRow>& boundary_fixtures();

/// Recomputes all eight boundary energies (quantum rows first) and throws
/// CrossCheckError if any differs from its fixture by more than 1e-6.
std::vector<BoundaryRow> stage_table();

/// A stage runs between consecutive boundary rows: 1, 2, 3 (quantum, a->b,
/// b->c, c->d) and A, B, C (classical, same rows).
struct StageSpec {
  std::string label;
  StageKind kind = StageKind::quantum;
  double start_param = 0.0;
  double end_param = 0.0;
  /// E0(m_f), or <V> at beta_f. Filled by stage_spec.
  double target_energy = 0.0;
};

/// Stage bounds only; target_energy is left at 0.
StageSpec stage_bounds(std::string_view label);
/// Stage bounds plus the recomputed target energy.
StageSpec stage_spec(std::string_view label, const PotentialParams& params = {});

struct ResidualPoint {
  double total_time = 0.0;
  double residual = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ResidualCurve {
  std::vector<ResidualPoint> samples;
  FitMode fit_mode = FitMode::all_points;
  std::optional<DecayFit> fit;
  /// "ok", or the reason no exponent was produced (e.g. "insufficient points").
  std::string fit_status;
};

/// Power-law fit of a curve restricted to log10 T in [lo, hi] when a window
/// is given. Never throws for too few points; records the status instead.
void fit_curve(ResidualCurve& curve, FitMode mode,
               std::optional<std::pair<double, double>> log10_window = std::nullopt);

struct QuantumSweepOptions {
  PropagationConfig propagation;
  std::size_t n_points = 2048;
  int threads = 1;
};

struct QuantumCell {
  double total_time = 0.0;
  double residual = 0.0;
  Trajectory trajectory;
};

struct QuantumSweep {
  Grid grid;
  double e0_final = 0.0;
  std::vector<QuantumCell> cells;
};

/// Quantum anneal from the ground state at m_i for each T, on the stage's
/// converged grid (resampled to n_points).
QuantumSweep quantum_sweep(const PotentialParams& params, const StageSpec& stage,
                           MassScheduleKind kind, const std::vector<double>& total_times,
                           const QuantumSweepOptions& options = {});

struct ClassicalSweepOptions {
  AnnealOptions anneal;
  int records = 20;  ///< evenly spaced trace records per run
  BetaScheduleKind kind = BetaScheduleKind::linear;
};

struct ClassicalCell {
  double total_time = 0.0;
  ResidualSample residual;
  AnnealSeries series;
};

/// Classical anneal at each T from the Boltzmann distribution at beta_i.
/// Every T uses the same seed.
std::vector<ClassicalCell> classical_sweep(const PotentialParams& params, const StageSpec& stage,
                                           double step_size, std::size_t particles,
                                           std::uint64_t seed,
                                           const std::vector<double>& total_times,
                                           const ClassicalSweepOptions& options = {});

/// Parsed experiment file. Sections and keys:
///   [potential] k h0 w0
///   [run]       stage schedule T log10_T t_max beta_i seed threads output
///   [quantum]   dt n_points integrator max_kinetic_phase observer_stride dump_state
///   [classical] s N adaptive_step records
///   [fit]       mode window
/// T is a comma list; log10_T is lo:hi:count (inclusive, log spaced).
struct ExperimentConfig {
  PotentialParams potential;
  std::string stage;  ///< 1|2|3|A|B|C; empty for logarithmic runs
  std::string schedule = "linear";
  std::vector<double> total_times;
  double t_max = 0.0;
  double beta_initial = 0.0;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output;

  double dt = 0.1;
  std::size_t n_points = 2048;
  Integrator integrator = Integrator::split_step;
  double max_kinetic_phase = PropagationConfig{}.max_kinetic_phase;
  int observer_stride = 10;
  bool dump_state = false;  ///< also write the final wavefunction (x,re,im)

  double step_size = 1.0;
  std::size_t particles = 1000000;
  bool adaptive_step = false;
  int records = 20;

  FitMode fit_mode = FitMode::all_points;
  std::optional<std::pair<double, double>> fit_window;

  bool is_logarithmic() const { return schedule == "logarithmic" || schedule == "log"; }
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  /// Normalized key = value text; equal configs give equal text.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical().
  std::uint64_t hash() const;
};

/// Strict parser: unknown sections or keys, duplicates and malformed values
/// are ConfigError with a line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

struct ExperimentResult {
  ResidualCurve curve;                  ///< sweeps
  std::optional<LogScheduleResult> log; ///< logarithmic runs
  std::string grid_description;         ///< "x_max=..., n_points=..." or "none"
};

/// Dispatches to the quantum or classical pipeline, fits, and writes
/// summary.csv, trace/*.csv and meta.json under config.output when set.
/// Identical configs produce byte-identical files.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string version_string();

}  // namespace annealab
