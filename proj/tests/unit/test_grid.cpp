#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "annealab/grid.hpp"
#include "annealab/potential.hpp"

using namespace annealab;
using doctest::Approx;
constexpr Complex I{0.0, 1.0};

namespace {

Wavefunction random_state(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Wavefunction psi(g);
  for (std::size_t j = 0; j < g.size(); ++j) psi[j] = {n(rng), n(rng)};
  return psi;
}

Wavefunction smooth_random_state(const Grid& g, std::uint64_t seed) {
  // random combination of low modes under a Gaussian window, so the
  // spectral derivative is meaningful
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Wavefunction psi(g);
  const auto x = g.points();
  for (std::size_t j = 0; j < g.size(); ++j) {
    Complex v = 0.0;
    for (int m = 0; m < 6; ++m) v += Complex(n(rng), n(rng)) * std::exp(I * (m * 1.3 * x[j]));
    psi[j] = v * std::exp(-x[j] * x[j] / 2.0);
  }
  return psi;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g(10.0, 8);
  CHECK(g.dx() == 2.5);
  CHECK(g.points().front() == -10.0);
  CHECK(g.points().back() == 7.5);
  CHECK(Grid(1.0, 16).dk() == Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(Grid(20.0, 2048).dx() == 0.01953125);
  const Grid h(3.0, 64);
  double total = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) total += h.dx();
  CHECK(total == Approx(6.0).epsilon(1e-14));
  for (std::size_t j = 1; j < h.size(); ++j) CHECK(h.points()[j] > h.points()[j - 1]);
  // symmetric about 0 apart from the unpaired left endpoint
  for (std::size_t j = 1; j < h.size(); ++j) {
    CHECK(h.points()[j] == Approx(-h.points()[h.size() - j]).scale(1.0));
  }
  // DFT ordering: 0, dk, ..., then negatives
  const auto k = h.wavenumbers();
  CHECK(k[0] == 0.0);
  CHECK(k[1] == Approx(h.dk()));
  CHECK(k[32] == Approx(-32 * h.dk()));
  CHECK(k[63] == Approx(-h.dk()));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(1.0, 12), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Grid(0.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(Grid(-1.0, 16), std::invalid_argument);
  CHECK(is_power_of_two(1024));
  CHECK_FALSE(is_power_of_two(1000));
}

TEST_CASE("Parseval with the unitary transform") {
  const Grid g(7.0, 256);
  const auto psi = random_state(g, 1);
  ComplexVector out(g.size());
  g.forward(psi.amplitudes(), out);
  double a = 0.0, b = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    a += std::norm(psi[j]) * g.dx();
    b += std::norm(out[j]) * g.dx();
  }
  CHECK(std::abs(a - b) < 1e-12 * a);
  ComplexVector back(g.size());
  g.backward(out, back);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(back[j] - psi[j]) < 1e-12);
}

TEST_CASE("kinetic operator on known functions") {
  const Grid g(8.0, 256);
  const auto x = g.points();
  SUBCASE("plane wave") {
    const double k0 = 5 * g.dk();
    Wavefunction psi(g);
    for (std::size_t j = 0; j < g.size(); ++j) psi[j] = std::exp(I * (k0 * x[j]));
    const auto t = apply_kinetic(psi, 1.0);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(t[j] - 0.5 * k0 * k0 * psi[j]) < 1e-11);
    const auto t3 = apply_kinetic(psi, 3.0);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(t3[j] - k0 * k0 / 6.0 * psi[j]) < 1e-11);
  }
  SUBCASE("constant") {
    Wavefunction psi(g);
    for (std::size_t j = 0; j < g.size(); ++j) psi[j] = 0.3;
    const auto t = apply_kinetic(psi, 1.0);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(t[j]) < 1e-13);
  }
  SUBCASE("Gaussian against finite differences") {
    const Grid fine(8.0, 4096);
    const auto xf = fine.points();
    const double sigma = 0.7;
    Wavefunction psi(fine);
    auto f = [&](double y) { return std::exp(-y * y / (2 * sigma * sigma)); };
    for (std::size_t j = 0; j < fine.size(); ++j) psi[j] = f(xf[j]);
    const auto t = apply_kinetic(psi, 1.0);
    const double h = 1e-3;
    for (std::size_t j = 1024; j < 3072; j += 37) {
      const double fd = -0.5 * (f(xf[j] + h) - 2 * f(xf[j]) + f(xf[j] - h)) / (h * h);
      CHECK(std::abs(t[j].real() - fd) < 1e-6);  // O(h^2) difference error
    }
  }
  CHECK_THROWS_AS(apply_kinetic(Wavefunction(g), 0.0), std::invalid_argument);
}

TEST_CASE("kinetic operator is Hermitian and positive") {
  const Grid g(6.0, 512);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = random_state(g, seed);
    const auto b = random_state(g, seed + 100);
    const Complex lhs = inner_product(a, apply_kinetic(b, 1.7));
    const Complex rhs = std::conj(inner_product(b, apply_kinetic(a, 1.7)));
    const double scale = std::abs(lhs) + 1.0;
    CHECK(std::abs(lhs - rhs) < 1e-12 * scale);
    const Complex aka = inner_product(a, apply_kinetic(a, 1.7));
    CHECK(aka.real() >= 0.0);
    CHECK(std::abs(aka.imag()) < 1e-12 * aka.real());
    const auto s = smooth_random_state(g, seed);
    CHECK(inner_product(s, apply_kinetic(s, 0.01)).real() >= 0.0);
  }
}

TEST_CASE("inner products") {
  const Grid g(5.0, 128);
  auto psi = random_state(g, 7);
  psi.normalize();
  CHECK(std::abs(inner_product(psi, psi) - 1.0) < 1e-14);
  CHECK(psi.norm_squared() == Approx(1.0).epsilon(1e-14));
  Wavefunction ipsi = psi;
  ipsi *= I;
  CHECK(std::abs(inner_product(psi, ipsi) - I) < 1e-14);
  const auto x = g.points();
  Wavefunction a(g), b(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    a[j] = std::exp(I * (3 * g.dk() * x[j]));
    b[j] = std::exp(I * (7 * g.dk() * x[j]));
  }
  CHECK(std::abs(inner_product(a, b)) < 1e-12);
  CHECK_THROWS_AS(inner_product(a, Wavefunction(Grid(5.0, 64))), std::invalid_argument);
}

TEST_CASE("spectral derivative") {
  const Grid g(8.0, 512);
  const auto x = g.points();
  Wavefunction psi(g);
  for (std::size_t j = 0; j < g.size(); ++j) psi[j] = std::exp(-x[j] * x[j]);
  const auto d = spectral_derivative(psi);
  for (std::size_t j = 0; j < g.size(); j += 7) {
    CHECK(std::abs(d[j] - (-2 * x[j] * std::exp(-x[j] * x[j]))) < 1e-10);
  }
}

TEST_CASE("grid selection") {
  // harmonic ground state has sigma = m^{-1/4} / sqrt(2) in |psi|^2 terms;
  // the edge criterion must put x_max past 6 sigma_x with sigma_x = m^{-1/4}
  const PotentialParams harmonic{1.0, 0.0, 0.2};
  for (double m : {1.0, 16.0}) {
    CHECK(select_x_max(harmonic, m) >= 6.0 * std::pow(m, -0.25) * 0.8);
  }
  const auto c = converged_grid({1, 0.2, 0.2}, 1.0, 1e3);
  CHECK(c.grid.size() == 2048);
  CHECK(std::abs(c.e0_initial - 0.5999898) < 1e-6);
  CHECK(std::abs(c.e0_final - 0.1050870) < 1e-6);
  CHECK(c.drift_initial < 1e-7);
  CHECK(c.drift_final < 1e-7);
  const auto c3 = converged_grid({1, 0.2, 0.2}, 1e5, 1e6);
  CHECK(c3.drift_initial < 1e-7);
  CHECK(c3.drift_final < 1e-7);
  CHECK(std::abs(c3.e0_final - 0.0049617) < 1e-6);
  CHECK_THROWS_AS(converged_grid({1, 0.2, 0.2}, 10.0, 1.0), std::invalid_argument);
}
