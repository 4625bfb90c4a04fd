#pragma once

#include <cstddef>
#include <vector>

#include "annealab/grid.hpp"
#include "annealab/potential.hpp"

namespace annealab {

enum class EigenMethod {
  automatic,  ///< dense up to kDenseLimit points, Lanczos beyond
  dense,      ///< parity-reduced dense tridiagonalization
  lanczos,    ///< matrix-free Lanczos with full reorthogonalization
};

inline constexpr std::size_t kDenseLimit = 4096;

/// Lowest eigenpairs of H(m) = p^2/2m + V on a grid.
struct EigenResult {
  double mass = 0.0;
  std::vector<double> energies;     ///< ascending
  std::vector<Wavefunction> states; ///< unit norm, phase-fixed
  std::vector<double> residuals;    ///< ||H psi - E psi|| per state
  /// Set when |E2 - E1| < 1e-9 |E1|. The pair is then rotated into states
  /// localized on either side of the origin, the x < 0 one first.
  bool degenerate_first_excited = false;
  int iterations = 0;  ///< Lanczos steps taken (0 for dense)
};

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  int max_iterations = 4000;
  double tolerance = 1e-12;  ///< relative Ritz residual for Lanczos
};

/// The `count` smallest eigenpairs. Throws ConvergenceError when Lanczos
/// stalls or a residual exceeds 1e-8 |E|.
EigenResult lowest_eigenpairs(const Grid& grid, const PotentialParams& params, double mass,
                              int count, const EigenOptions& options = {});

struct CurvePoint {
  double mass = 0.0;
  double value = 0.0;
};

/// Grid used by the curve sweeps: wide enough for the lowest three states.
Grid grid_for_mass(const PotentialParams& params, double mass, std::size_t n_points = 2048);

/// E0(m) at each mass, each on its own grid_for_mass grid.
std::vector<CurvePoint> energy_curve(const PotentialParams& params,
                                     const std::vector<double>& masses, int threads = 1);

/// Delta(m) = E1 - E0 at each mass.
std::vector<CurvePoint> gap_curve(const PotentialParams& params, const std::vector<double>& masses,
                                  int threads = 1);

}  // namespace annealab
