#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace annealab::detail {

namespace {

// Number of eigenvalues strictly below x (Sturm sequence).
int count_below(std::span<const double> d, std::span<const double> e, double x) {
  const double tiny = std::numeric_limits<double>::min();
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1] / q;
    q = d[i] - x - off;
    if (std::abs(q) < tiny) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

double kth_eigenvalue(std::span<const double> d, std::span<const double> e, int k, double lo,
                      double hi) {
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) {
      break;
    }
    (count_below(d, e, mid) > k ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Solves (T - shift) y = b by Gaussian elimination with partial pivoting.
std::vector<double> shifted_solve(std::span<const double> d, std::span<const double> e,
                                  double shift, std::vector<double> b) {
  const std::size_t n = d.size();
  const double floor = std::numeric_limits<double>::epsilon() *
                       std::max(1.0, *std::max_element(d.begin(), d.end(), [](double a, double c) {
                         return std::abs(a) < std::abs(c);
                       }));
  // Row i of U holds u0[i] (diagonal), u1[i], u2[i] (two superdiagonals).
  std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0);
  // Current working row: (diag, super) of row i before elimination.
  double a = d[0] - shift;
  double c = n > 1 ? e[0] : 0.0;
  double c2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double below = e[i];
    const double next_diag = d[i + 1] - shift;
    const double next_super = i + 2 < n ? e[i + 1] : 0.0;
    if (std::abs(a) >= std::abs(below)) {
      double piv = a == 0.0 ? floor : a;
      const double l = below / piv;
      u0[i] = piv;
      u1[i] = c;
      u2[i] = c2;
      a = next_diag - l * c;
      c = next_super - l * c2;
      c2 = 0.0;
      b[i + 1] -= l * b[i];
    } else {
      const double l = a / below;
      u0[i] = below;
      u1[i] = next_diag;
      u2[i] = next_super;
      const double new_a = c - l * next_diag;
      const double new_c = c2 - l * next_super;
      a = new_a;
      c = new_c;
      c2 = 0.0;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= l * b[i];
    }
  }
  u0[n - 1] = a == 0.0 ? floor : a;
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    if (i + 1 < n) s -= u1[i] * b[i + 1];
    if (i + 2 < n) s -= u2[i] * b[i + 2];
    b[i] = s / (std::abs(u0[i]) < floor ? std::copysign(floor, u0[i]) : u0[i]);
  }
  return b;
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = 1.0 / std::sqrt(s);
  for (double& x : v) x *= s;
}

}  // namespace

TridiagonalEigen tridiagonal_lowest(std::span<const double> d, std::span<const double> e,
                                    int count) {
  const std::size_t n = d.size();
  if (n == 0 || e.size() + 1 != n) throw std::invalid_argument("bad tridiagonal shape");
  count = std::min<int>(count, static_cast<int>(n));

  double lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double pad = 1e-12 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
  lo -= pad;
  hi += pad;

  TridiagonalEigen out;
  for (int k = 0; k < count; ++k) {
    const double lambda = kth_eigenvalue(d, e, k, lo, hi);
    std::vector<double> v(n);
    // Deterministic start with no special alignment to the eigenbasis.
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    for (int it = 0; it < 3; ++it) {
      v = shifted_solve(d, e, lambda, std::move(v));
      for (const auto& prev : out.vectors) {
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i) p += prev[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= p * prev[i];
      }
      normalize(v);
    }
    out.values.push_back(lambda);
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace annealab::detail
