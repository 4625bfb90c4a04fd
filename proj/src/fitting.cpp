#include "annealab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "annealab/errors.hpp"

namespace annealab {

DecayFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit abscissa/ordinate size mismatch");
  const auto n = x.size();
  if (n < 2) throw FitError("insufficient points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("insufficient points: abscissae coincide");
  DecayFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  fit.window_lo = *std::min_element(x.begin(), x.end());
  fit.window_hi = *std::max_element(x.begin(), x.end());
  fit.points = n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.exponent * x[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

FitMode parse_fit_mode(std::string_view name) {
  if (name == "all" || name == "all_points") return FitMode::all_points;
  if (name == "crests") return FitMode::crests;
  throw std::invalid_argument("unknown fit mode '" + std::string(name) + "'");
}

std::string to_string(FitMode mode) { return mode == FitMode::crests ? "crests" : "all_points"; }

std::vector<std::size_t> crest_indices(const std::vector<PowerLawSample>& s) {
  std::vector<std::size_t> out;
  const auto n = s.size();
  if (n < 3) return out;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s[i].t > 0.0) || !(s[i].r > 0.0)) throw FitError("power-law fit needs positive t and r");
    x[i] = std::log10(s[i].t);
    y[i] = std::log10(s[i].r);
  }
  // maxima of the detrended log curve; a decaying oscillation has no raw maxima
  const auto trend = linear_fit(x, y);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = y[i] - (trend.intercept + trend.exponent * x[i]);
  constexpr double kTie = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || d[i] > d[i - 1] + kTie;
    const bool right = i + 1 == n || d[i] > d[i + 1] + kTie;
    if (left && right) out.push_back(i);
  }
  return out;
}

DecayFit fit_power_law(std::vector<PowerLawSample> samples, FitMode mode) {
  std::sort(samples.begin(), samples.end(),
            [](const PowerLawSample& a, const PowerLawSample& b) { return a.t < b.t; });
  for (const auto& p : samples) {
    if (!(p.t > 0.0) || !(p.r > 0.0)) throw FitError("power-law fit needs positive t and r");
  }
  std::vector<std::size_t> use;
  if (mode == FitMode::crests) {
    use = crest_indices(samples);
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) use.push_back(i);
  }
  if (use.size() < 3) {
    throw FitError("insufficient points: " + std::to_string(use.size()) + " usable, need 3");
  }
  std::vector<double> x, y;
  for (auto i : use) {
    x.push_back(std::log10(samples[i].t));
    y.push_back(std::log10(samples[i].r));
  }
  return linear_fit(x, y);
}

}  // namespace annealab
