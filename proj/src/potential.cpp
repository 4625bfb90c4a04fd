#include "annealab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace annealab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Below this barrier height the corrugation is treated as absent.
constexpr double kHarmonicThreshold = 1e-15;

constexpr int kSamplesPerPeriod = 64;
constexpr double kBisectionTolerance = 1e-12;

double bisect_root(const PotentialParams& p, double lo, double hi) {
  double f_lo = potential_derivative(p, lo);
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = potential_derivative(p, mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void PotentialParams::validate() const {
  if (!(k > 0.0) || !(h0 >= 0.0) || !(w0 > 0.0) || !std::isfinite(k) || !std::isfinite(h0) ||
      !std::isfinite(w0)) {
    throw std::invalid_argument("invalid potential parameters: k=" + std::to_string(k) +
                                " h0=" + std::to_string(h0) + " w0=" + std::to_string(w0));
  }
}

double potential(const PotentialParams& p, double x) {
  return 0.5 * p.k * x * x + 0.5 * p.h0 * (1.0 - std::cos(kTwoPi * x / p.w0));
}

double potential_derivative(const PotentialParams& p, double x) {
  return p.k * x + (std::numbers::pi * p.h0 / p.w0) * std::sin(kTwoPi * x / p.w0);
}

double second_derivative_at_origin(const PotentialParams& p) {
  const double q = kTwoPi / p.w0;
  return p.k + 0.5 * p.h0 * q * q;
}

double potential_max_on(const PotentialParams& p, double x_max) {
  // The envelope is increasing in |x|, so the maximum is within one period of the edge.
  const double lo = std::max(0.0, x_max - p.w0);
  constexpr int kSamples = 256;
  double best = potential(p, x_max);
  for (int i = 0; i < kSamples; ++i) {
    best = std::max(best, potential(p, lo + (x_max - lo) * i / kSamples));
  }
  return best;
}

std::vector<double> local_minima(const PotentialParams& p) {
  p.validate();
  std::vector<double> minima;
  if (p.h0 < kHarmonicThreshold) return minima;

  // Past x_cut the harmonic slope beats the largest cosine slope pi h0 / w0.
  const double slope_amplitude = std::numbers::pi * p.h0 / p.w0;
  const double x_cut = 2.0 * slope_amplitude / p.k + p.w0;
  const double step = p.w0 / kSamplesPerPeriod;
  const auto n_steps = static_cast<long>(std::ceil(x_cut / step));

  // dV/dx > 0 just right of the origin, so the scan starts one step out.
  double x_prev = step;
  double d_prev = potential_derivative(p, x_prev);
  for (long i = 2; i <= n_steps; ++i) {
    const double x = step * static_cast<double>(i);
    const double d = potential_derivative(p, x);
    if (d_prev < 0.0 && d >= 0.0) {
      minima.push_back(bisect_root(p, x_prev, x));
    }
    x_prev = x;
    d_prev = d;
  }
  return minima;
}

int count_minima(const PotentialParams& p) { return static_cast<int>(local_minima(p).size()); }

std::vector<double> LinearRange::values() const {
  if (count == 0) throw std::invalid_argument("range must contain at least one sample");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

std::vector<PhaseDiagramCell> phase_diagram(const LinearRange& h0, const LinearRange& w0,
                                            double k) {
  if (h0.count < 2 || w0.count < 2) {
    throw std::invalid_argument("phase diagram needs at least 2 samples per axis");
  }
  if (!(h0.lo >= 0.0) || !(w0.lo > 0.0) || h0.hi < h0.lo || w0.hi < w0.lo) {
    throw std::invalid_argument("phase diagram ranges must be positive and ascending");
  }
  std::vector<PhaseDiagramCell> cells;
  cells.reserve(h0.count * w0.count);
  for (double w : w0.values()) {
    for (double h : h0.values()) {
      cells.push_back({h, w, count_minima({k, h, w})});
    }
  }
  return cells;
}

}  // namespace annealab
