#pragma once

#include <cstddef>
#include <vector>

namespace annealab {

/// Harmonic envelope plus cosine corrugation:
///   V(x) = k x^2 / 2 + (h0 / 2) [1 - cos(2 pi x / w0)]
/// The global minimum sits at x = 0; h0 sets the barrier height and w0 the
/// spacing between neighbouring minima.
struct PotentialParams {
  double k = 1.0;
  double h0 = 0.2;
  double w0 = 0.2;

  /// Throws std::invalid_argument unless k > 0, h0 >= 0 and w0 > 0.
  void validate() const;
};

double potential(const PotentialParams& p, double x);
double potential_derivative(const PotentialParams& p, double x);

/// Curvature at the origin, k + (h0/2)(2 pi / w0)^2: the spring constant of
/// the "inner" oscillator that approximates the central valley.
double second_derivative_at_origin(const PotentialParams& p);

/// Largest value of V on [-x_max, x_max].
double potential_max_on(const PotentialParams& p, double x_max);

/// Positions of the strict local minima in x > 0, ascending.
std::vector<double> local_minima(const PotentialParams& p);

/// Number of strict local minima in x > 0 (the N_min order parameter).
int count_minima(const PotentialParams& p);

/// Inclusive linear range of `count` samples; count == 1 yields {lo}.
struct LinearRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  std::vector<double> values() const;
};

struct PhaseDiagramCell {
  double h0 = 0.0;
  double w0 = 0.0;
  int n_min = 0;
};

/// N_min over the h0 x w0 grid, ordered with w0 varying slowest.
std::vector<PhaseDiagramCell> phase_diagram(const LinearRange& h0, const LinearRange& w0,
                                            double k = 1.0);

}  // namespace annealab
