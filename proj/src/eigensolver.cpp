#include "annealab/eigensolver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "annealab/errors.hpp"
#include "annealab/hamiltonian.hpp"
#include "annealab/parallel.hpp"
#include "tridiagonal.hpp"

namespace annealab {

namespace {

constexpr double kDegeneracyTolerance = 1e-9;
constexpr double kResidualTolerance = 1e-8;

// First column of the circulant spectral kinetic matrix: T_jl = c[(j - l) mod n].
std::vector<double> kinetic_column(const Grid& g, double mass) {
  const std::size_t n = g.size();
  const auto k = g.wavenumbers();
  std::vector<Complex> spectrum(n), column(n);
  for (std::size_t j = 0; j < n; ++j) spectrum[j] = 0.5 * k[j] * k[j] / mass;
  g.backward(spectrum, column);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = column[j].real() * s;
  return c;
}

// Symmetric or antisymmetric combinations of mirror points x_j <-> x_{n-j}.
// The points j = 0 (x = -x_max, its own periodic image) and j = n/2 (x = 0)
// map onto themselves and only enter the even block.
struct ParityBasis {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;  // == first for self-mirror points
  std::vector<double> weight;
  double sign = 1.0;

  std::size_t size() const { return first.size(); }
};

ParityBasis make_parity_basis(std::size_t n, bool even) {
  ParityBasis b;
  b.sign = even ? 1.0 : -1.0;
  const double r = 1.0 / std::sqrt(2.0);
  if (even) {
    b.first.push_back(0);
    b.second.push_back(0);
    b.weight.push_back(1.0);
  }
  for (std::size_t j = 1; j < n / 2; ++j) {
    b.first.push_back(j);
    b.second.push_back(n - j);
    b.weight.push_back(r);
  }
  if (even) {
    b.first.push_back(n / 2);
    b.second.push_back(n / 2);
    b.weight.push_back(1.0);
  }
  return b;
}

struct BlockEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // on the full grid, unit 2-norm
};

BlockEigen solve_parity_block(const std::vector<double>& c, std::span<const double> v,
                              const ParityBasis& basis, int want) {
  const std::size_t n = c.size();
  const std::size_t dim = basis.size();
  BlockEigen out;
  if (dim == 0 || want <= 0) return out;
  want = std::min<int>(want, static_cast<int>(dim));

  auto h = [&](std::size_t a, std::size_t b) {
    const std::size_t d = (a + n - b) % n;
    return c[d] + (a == b ? v[a] : 0.0);
  };
  Eigen::MatrixXd matrix(dim, dim);
  for (std::size_t l = 0; l < dim; ++l) {
    const std::size_t la = basis.first[l], lb = basis.second[l];
    for (std::size_t i = 0; i <= l; ++i) {
      const std::size_t ia = basis.first[i], ib = basis.second[i];
      double e;
      const bool i_self = ia == ib, l_self = la == lb;
      if (i_self && l_self) {
        e = h(ia, la);
      } else if (i_self || l_self) {
        e = std::sqrt(2.0) * h(ia, la);
      } else {
        e = h(ia, la) + basis.sign * h(ia, lb);
      }
      matrix(i, l) = e;
      matrix(l, i) = e;
    }
  }

  const Eigen::Tridiagonalization<Eigen::MatrixXd> tri(matrix);
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd sub = tri.subDiagonal();
  const auto small = detail::tridiagonal_lowest(
      std::span<const double>(diag.data(), dim), std::span<const double>(sub.data(), dim - 1), want);
  std::vector<double> w = small.values;
  Eigen::MatrixXd z(dim, want);
  for (int k = 0; k < want; ++k) {
    z.col(k) = Eigen::Map<const Eigen::VectorXd>(small.vectors[static_cast<std::size_t>(k)].data(),
                                                 static_cast<Eigen::Index>(dim));
  }
  z.applyOnTheLeft(tri.matrixQ());
  for (int e = 0; e < want; ++e) {
    std::vector<double> full(n, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      const double zi = z(static_cast<Eigen::Index>(i), e);
      if (basis.first[i] == basis.second[i]) {
        full[basis.first[i]] = zi;
      } else {
        full[basis.first[i]] = basis.weight[i] * zi;
        full[basis.second[i]] = basis.sign * basis.weight[i] * zi;
      }
    }
    out.values.push_back(w[static_cast<std::size_t>(e)]);
    out.vectors.push_back(std::move(full));
  }
  return out;
}

BlockEigen merge_lowest(BlockEigen even, BlockEigen odd, int want) {
  std::vector<std::pair<double, std::vector<double>*>> merged;
  for (std::size_t i = 0; i < even.values.size(); ++i) merged.emplace_back(even.values[i], &even.vectors[i]);
  for (std::size_t i = 0; i < odd.values.size(); ++i) merged.emplace_back(odd.values[i], &odd.vectors[i]);
  std::stable_sort(merged.begin(), merged.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  BlockEigen out;
  for (std::size_t i = 0; i < merged.size() && static_cast<int>(i) < want; ++i) {
    out.values.push_back(merged[i].first);
    out.vectors.push_back(std::move(*merged[i].second));
  }
  return out;
}

BlockEigen dense_lowest(const Grid& grid, std::span<const double> v, double mass, int want) {
  const auto c = kinetic_column(grid, mass);
  const std::size_t n = grid.size();
  BlockEigen even = solve_parity_block(c, v, make_parity_basis(n, true), want);
  BlockEigen odd = solve_parity_block(c, v, make_parity_basis(n, false), want);

  return merge_lowest(std::move(even), std::move(odd), want);
}

void apply_real_hamiltonian(const Grid& grid, std::span<const double> v, double mass,
                            std::span<const double> in, std::span<double> out) {
  Wavefunction psi(grid);
  for (std::size_t j = 0; j < in.size(); ++j) psi[j] = in[j];
  const Wavefunction h = apply_hamiltonian(psi, v, mass);
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = h[j].real();
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Deterministic start vector in the even or odd sector under x_j <-> x_{n-j}.
std::vector<double> lanczos_start(const Grid& grid, bool even) {
  const auto x = grid.points();
  const std::size_t n = x.size();
  const double width = 0.25 * grid.x_max();
  std::vector<double> s(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (std::size_t j = 0; j < n; ++j) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    const double noise = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    const double u = x[j] / width;
    s[j] = std::exp(-0.5 * u * u) * (1.0 + 0.5 * u + 0.05 * noise);
  }
  std::vector<double> p(n);
  const double sign = even ? 1.0 : -1.0;
  for (std::size_t j = 0; j < n; ++j) p[j] = s[j] + sign * s[(n - j) % n];
  const double nrm = std::sqrt(dot(p, p));
  for (auto& e : p) e /= nrm;
  return p;
}

BlockEigen lanczos_sector(const Grid& grid, std::span<const double> v, double mass, int want,
                          bool even, const EigenOptions& opt, int& iterations) {
  const std::size_t n = grid.size();
  const int sector_dim = static_cast<int>(even ? n / 2 + 1 : n / 2 - 1);
  want = std::min(want, sector_dim);
  const int max_steps = std::min(opt.max_iterations, sector_dim);
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  basis.push_back(lanczos_start(grid, even));
  std::vector<double> w(n);

  detail::TridiagonalEigen ritz;
  int m = 0;
  bool converged = false;
  double worst = std::numeric_limits<double>::infinity();

  for (int step = 0; step < max_steps; ++step) {
    const auto& q = basis.back();
    apply_real_hamiltonian(grid, v, mass, q, w);
    // Transform rounding leaks into the other sector; project it out.
    const double sign = even ? 1.0 : -1.0;
    for (std::size_t j = 0; j <= n / 2; ++j) {
      const std::size_t mj = (n - j) % n;
      const double sym = 0.5 * (w[j] + sign * w[mj]);
      w[j] = sym;
      w[mj] = sign * sym;
    }
    const double a = dot(q, w);
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] -= a * q[i];
      if (basis.size() > 1) w[i] -= beta.back() * basis[basis.size() - 2][i];
    }
    // Two passes of classical Gram-Schmidt keep the basis orthogonal to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double proj = dot(b, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= proj * b[i];
      }
    }
    const double b = std::sqrt(dot(w, w));
    m = static_cast<int>(alpha.size());
    // A full sector basis spans the space exactly.
    const bool invariant = b < 1e-14 * std::abs(a) || m == sector_dim;
    const bool exhausted = invariant || step + 1 == max_steps;

    if (m >= want && (m % 10 == 0 || exhausted)) {
      ritz = detail::tridiagonal_lowest(alpha, std::span<const double>(beta.data(), m - 1), want);
      worst = 0.0;
      for (int i = 0; i < want; ++i) {
        const double res = b * std::abs(ritz.vectors[static_cast<std::size_t>(i)].back());
        worst = std::max(worst, res / std::max(std::abs(ritz.values[static_cast<std::size_t>(i)]), 1e-300));
      }
      if (worst < opt.tolerance || exhausted) {
        converged = worst < opt.tolerance || invariant;
        break;
      }
    }
    beta.push_back(b);
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
    basis.push_back(std::move(next));
  }
  iterations += m;
  if (!converged) {
    std::ostringstream msg;
    msg << "Lanczos did not converge after " << m << " iterations (relative residual " << worst
        << ")";
    throw ConvergenceError(msg.str());
  }

  BlockEigen out;
  for (int i = 0; i < want; ++i) {
    std::vector<double> vec(n, 0.0);
    const auto& y = ritz.vectors[static_cast<std::size_t>(i)];
    for (int k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < n; ++j) vec[j] += y[static_cast<std::size_t>(k)] * basis[static_cast<std::size_t>(k)][j];
    }
    const double nrm = std::sqrt(dot(vec, vec));
    for (auto& e : vec) e /= nrm;
    out.values.push_back(ritz.values[static_cast<std::size_t>(i)]);
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

BlockEigen lanczos_lowest(const Grid& grid, std::span<const double> v, double mass, int want,
                          const EigenOptions& opt, int& iterations) {
  iterations = 0;
  BlockEigen even = lanczos_sector(grid, v, mass, want, true, opt, iterations);
  BlockEigen odd = lanczos_sector(grid, v, mass, want, false, opt, iterations);
  return merge_lowest(std::move(even), std::move(odd), want);
}

void fix_phase(Wavefunction& psi) {
  std::size_t arg = 0;
  for (std::size_t j = 1; j < psi.size(); ++j) {
    if (std::norm(psi[j]) > std::norm(psi[arg])) arg = j;
  }
  const double mag = std::abs(psi[arg]);
  if (mag > 0.0) psi *= std::conj(psi[arg]) / mag;
}

double mean_position(const Wavefunction& psi) {
  const auto x = psi.grid().points();
  double s = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) s += x[j] * std::norm(psi[j]);
  return s * psi.grid().dx();
}

}  // namespace

EigenResult lowest_eigenpairs(const Grid& grid, const PotentialParams& params, double mass,
                              int count, const EigenOptions& options) {
  if (count < 1) throw std::invalid_argument("eigenpair count must be >= 1");
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  params.validate();

  const auto v = potential_on_grid(grid, params);
  // One extra level so a degenerate partner of the last requested level is seen.
  const int want = std::min<int>(count + 1, static_cast<int>(grid.size()));

  EigenMethod method = options.method;
  if (method == EigenMethod::automatic) {
    method = grid.size() <= kDenseLimit ? EigenMethod::dense : EigenMethod::lanczos;
  }
  EigenResult result;
  result.mass = mass;
  BlockEigen raw = method == EigenMethod::dense
                       ? dense_lowest(grid, v, mass, want)
                       : lanczos_lowest(grid, v, mass, want, options, result.iterations);

  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(count), raw.values.size());
  while (keep < raw.values.size() &&
         std::abs(raw.values[keep] - raw.values[keep - 1]) <
             kDegeneracyTolerance * std::abs(raw.values[keep - 1])) {
    ++keep;
  }

  const double inv_sqrt_dx = 1.0 / std::sqrt(grid.dx());
  for (std::size_t i = 0; i < keep; ++i) {
    Wavefunction psi(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) psi[j] = raw.vectors[i][j] * inv_sqrt_dx;
    result.energies.push_back(raw.values[i]);
    result.states.push_back(std::move(psi));
  }

  if (result.energies.size() >= 3 &&
      std::abs(result.energies[2] - result.energies[1]) <
          kDegeneracyTolerance * std::abs(result.energies[1])) {
    result.degenerate_first_excited = true;
    const double r = 1.0 / std::sqrt(2.0);
    Wavefunction a = result.states[1];
    Wavefunction b = result.states[1];
    Wavefunction minus = result.states[2];
    minus *= -1.0;
    a += result.states[2];
    b += minus;
    a *= r;
    b *= r;
    if (mean_position(a) > mean_position(b)) std::swap(a, b);
    result.states[1] = std::move(a);
    result.states[2] = std::move(b);
  }

  for (std::size_t i = 0; i < result.states.size(); ++i) {
    Wavefunction& psi = result.states[i];
    fix_phase(psi);
    Wavefunction h = apply_hamiltonian(psi, v, mass);
    double r2 = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) r2 += std::norm(h[j] - result.energies[i] * psi[j]);
    const double residual = std::sqrt(r2 * grid.dx());
    result.residuals.push_back(residual);
    if (residual > kResidualTolerance * std::abs(result.energies[i])) {
      std::ostringstream msg;
      msg << "eigenpair " << i << " at m=" << mass << " has residual " << residual
          << " (E=" << result.energies[i] << ")";
      throw ConvergenceError(msg.str());
    }
  }
  return result;
}

Grid grid_for_mass(const PotentialParams& params, double mass, std::size_t n_points) {
  return Grid(select_x_max(params, mass, 1024, 1e-12, 3), n_points);
}

std::vector<CurvePoint> energy_curve(const PotentialParams& params,
                                     const std::vector<double>& masses, int threads) {
  std::vector<CurvePoint> out(masses.size());
  parallel_for(masses.size(), threads, [&](std::size_t i) {
    const Grid g = grid_for_mass(params, masses[i]);
    out[i] = {masses[i], lowest_eigenpairs(g, params, masses[i], 1).energies[0]};
  });
  return out;
}

std::vector<CurvePoint> gap_curve(const PotentialParams& params, const std::vector<double>& masses,
                                  int threads) {
  std::vector<CurvePoint> out(masses.size());
  parallel_for(masses.size(), threads, [&](std::size_t i) {
    const Grid g = grid_for_mass(params, masses[i]);
    const EigenResult r = lowest_eigenpairs(g, params, masses[i], 2);
    out[i] = {masses[i], r.energies[1] - r.energies[0]};
  });
  return out;
}

}  // namespace annealab
