#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace annealab {

/// Straight-line fit y = exponent * x + intercept over a window of abscissae.
struct DecayFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double r_squared = 0.0;  ///< 1 when the data are exactly linear or constant
  std::size_t points = 0;
};

/// Ordinary least squares. Throws FitError with fewer than two distinct x.
DecayFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class FitMode { all_points, crests };

FitMode parse_fit_mode(std::string_view name);
std::string to_string(FitMode mode);

struct PowerLawSample {
  double t = 0.0;
  double r = 0.0;
};

/// Indices of local maxima of log10 r, after subtracting the all-points
/// log-log line, along t-ordered samples. An endpoint counts when it exceeds
/// its single neighbour. An exact power law has none.
std::vector<std::size_t> crest_indices(const std::vector<PowerLawSample>& samples);

/// Fit of log10 r against log10 t. Crest mode keeps only crest_indices.
/// Throws FitError with fewer than three usable points or a nonpositive r.
DecayFit fit_power_law(std::vector<PowerLawSample> samples, FitMode mode);

}  // namespace annealab
