#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "annealab/eigensolver.hpp"
#include "annealab/errors.hpp"
#include "annealab/grid.hpp"

namespace annealab {

namespace {

bool edges_negligible(const PotentialParams& params, double mass, double x_max,
                      std::size_t n_points, double edge_ratio, int levels) {
  const Grid g(x_max, n_points);
  const auto r = lowest_eigenpairs(g, params, mass, levels, {EigenMethod::dense});
  for (const auto& state : r.states) {
    const auto rho = state.density();
    const double peak = *std::max_element(rho.begin(), rho.end());
    if (!(std::max(rho.front(), rho.back()) < edge_ratio * peak)) return false;
  }
  return true;
}

}  // namespace

double select_x_max(const PotentialParams& params, double mass, std::size_t n_points,
                    double edge_ratio, int levels) {
  params.validate();
  // Gaussian ground state of the stiffer inner oscillator: a lower bound.
  const double k_inner = second_derivative_at_origin(params);
  double lo = std::sqrt(std::log(1.0 / edge_ratio) / std::sqrt(k_inner * mass));
  if (edges_negligible(params, mass, lo, n_points, edge_ratio, levels)) return lo;
  double hi = lo;
  for (int i = 0;; ++i) {
    if (i == 60) throw ConvergenceError("no half-width satisfies the edge-density criterion");
    lo = hi;
    hi *= 1.25;
    if (edges_negligible(params, mass, hi, n_points, edge_ratio, levels)) break;
  }
  while (hi / lo > 1.05) {
    const double mid = std::sqrt(lo * hi);
    (edges_negligible(params, mass, mid, n_points, edge_ratio, levels) ? hi : lo) = mid;
  }
  return hi;
}

GridConvergence converged_grid(const PotentialParams& params, double m_initial, double m_final,
                               double tolerance) {
  if (!(m_initial > 0.0) || !(m_final > m_initial)) {
    throw std::invalid_argument("converged_grid requires 0 < m_initial < m_final");
  }
  // Three levels so diabatic excitation into the side wells stays on the grid.
  const double x_max = select_x_max(params, m_initial, 1024, 1e-12, 3);

  auto drift = [&](double mass, double& e2048) {
    std::array<double, 3> e{};
    const std::array<std::size_t, 3> sizes{1024, 2048, 4096};
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      e[i] = lowest_eigenpairs(Grid(x_max, sizes[i]), params, mass, 1).energies[0];
    }
    e2048 = e[1];
    const auto [mn, mx] = std::minmax_element(e.begin(), e.end());
    return (*mx - *mn) / std::abs(e[1]);
  };

  GridConvergence out{Grid(x_max, 2048)};
  out.drift_initial = drift(m_initial, out.e0_initial);
  out.drift_final = drift(m_final, out.e0_final);
  for (auto [label, mass, d] : {std::tuple{"initial", m_initial, out.drift_initial},
                                std::tuple{"final", m_final, out.drift_final}}) {
    if (!(d < tolerance)) {
      std::ostringstream msg;
      msg << "grid not converged at " << label << " mass " << mass << ": E0 drift " << d
          << " across 1024/2048/4096 points (x_max=" << x_max << ")";
      throw ConvergenceError(msg.str());
    }
  }
  return out;
}

}  // namespace annealab
