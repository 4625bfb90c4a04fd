#include "doctest.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "annealab/classical_mc.hpp"
#include "annealab/philox.hpp"

using namespace annealab;
using doctest::Approx;

namespace {

const PotentialParams kSK{1.0, 0.2, 0.2};
const PotentialParams kHarmonic{1.0, 0.0, 0.2};

// Plain trapezoid rule on a fine uniform grid; independent of the library quadrature.
double trapezoid_average_v(const PotentialParams& p, double beta) {
  const double X = std::sqrt(2.0 * 60.0 / (beta * p.k));
  const int n = 2000000;
  const double h = 2 * X / n;
  double z = 0.0, zv = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -X + i * h;
    const double w = (i == 0 || i == n ? 0.5 : 1.0) * std::exp(-beta * potential(p, x));
    z += w;
    zv += w * potential(p, x);
  }
  return zv / z;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
Moments moments(const std::vector<double>& xs, F f) {
  double s = 0.0, s2 = 0.0;
  for (double x : xs) {
    const double v = f(x);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(xs.size());
  const double mean = s / n;
  return {mean, std::sqrt((s2 / n - mean * mean) / (n - 1))};
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  CHECK(unit_open(0, 0) > 0.0);
  CHECK(unit_open(0xffffffff, 0xffffffff) < 1.0);
  // uniforms look uniform
  double s = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) s += philox_uniforms(3, i, 17).first;
  CHECK(std::abs(s / 100000 - 0.5) < 5 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("equilibrium quadrature") {
  const double lb[] = {0.29, 1.18, 1.97, 2.35};
  const double u[] = {0.6031582, 0.1061226, 0.0156931, 0.0049526};
  double prev = 1e300;
  for (int i = 0; i < 4; ++i) {
    const double beta = std::pow(10.0, lb[i]);
    const auto eq = equilibrium(kSK, beta);
    CHECK(std::abs(eq.internal_energy - u[i]) < 1e-6);
    CHECK(eq.internal_energy == Approx(0.5 / beta + eq.avg_potential).epsilon(1e-15));
    CHECK(eq.avg_potential == Approx(trapezoid_average_v(kSK, beta)).epsilon(1e-9));
    CHECK(eq.avg_potential >= 0.0);
    CHECK(eq.internal_energy < prev);
    prev = eq.internal_energy;
  }
  for (double beta : {0.1, 1.0, 37.0}) {
    CHECK(equilibrium(kHarmonic, beta).avg_potential == Approx(0.5 / beta).epsilon(1e-10));
    CHECK(equilibrium(kHarmonic, beta).partition_log ==
          Approx(0.5 * std::log(2 * M_PI / beta)).epsilon(1e-10));
  }
  CHECK(boltzmann_average(kHarmonic, 2.0, [](double x) { return x * x; }) == Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(equilibrium(kSK, 0.0), std::invalid_argument);
}

TEST_CASE("equilibrium log-log slope") {
  CHECK(std::abs(alpha_eq(kHarmonic, 3.0) + 1.0) < 1e-6);
  // tangent oracle: d ln<V> / d ln beta = -beta Var(V) / <V>
  for (double lb : {0.94, 1.66, 2.40}) {
    const double beta = std::pow(10.0, lb);
    const auto v = [&](double x) { return potential(kSK, x); };
    const double m1 = boltzmann_average(kSK, beta, v);
    const double m2 = boltzmann_average(kSK, beta, [&](double x) { return v(x) * v(x); });
    CHECK(alpha_eq(kSK, beta) == Approx(-beta * (m2 - m1 * m1) / m1).epsilon(1e-4));
  }
  // secant across the log-schedule fit window reproduces the tabulated values
  CHECK(std::abs(alpha_eq_secant(kSK, std::pow(10.0, 0.79), std::pow(10.0, 0.94)) + 0.74) < 0.02);
  CHECK(std::abs(alpha_eq_secant(kSK, std::pow(10.0, 2.25), std::pow(10.0, 2.40)) + 1.59) < 0.03);
}

TEST_CASE("Boltzmann sampling") {
  SUBCASE("harmonic variance") {
    const auto xs = sample_boltzmann(kHarmonic, 1.0, 200000, 9);
    const auto m = moments(xs, [](double x) { return x * x; });
    CHECK(std::abs(m.mean - 1.0) < 5 * m.se);
  }
  SUBCASE("reference potential mean") {
    const double beta = std::pow(10.0, 0.29);
    const auto xs = sample_boltzmann(kSK, beta, 1000000, 11);
    const auto m = moments(xs, [](double x) { return potential(kSK, x); });
    CHECK(std::abs(m.mean - (0.6031582 - 0.5 / beta)) < 5 * m.se + 1e-6);
  }
  SUBCASE("cold ensemble is multimodal") {
    const double beta = std::pow(10.0, 2.35);
    const auto xs = sample_boltzmann(kSK, beta, 400000, 5);
    const double x1 = local_minima(kSK).front();
    auto count_near = [&](double c) {
      return std::count_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x - c) < 0.01; });
    };
    const double barrier = 0.5 * x1;
    CHECK(count_near(x1) > 3 * count_near(barrier));
    CHECK(count_near(-x1) > 3 * count_near(-barrier));
    CHECK(count_near(0.0) > count_near(x1));
  }
  CHECK(sample_boltzmann(kSK, 2.0, 1000, 4) == sample_boltzmann(kSK, 2.0, 1000, 4));
  CHECK(sample_boltzmann(kSK, 2.0, 1000, 4) != sample_boltzmann(kSK, 2.0, 1000, 5));
}

TEST_CASE("kernel potential agrees with the reference") {
  for (int i = -4000; i <= 4000; ++i) {
    const double x = i * 0.00731;
    CHECK(kernel_potential(kSK, x) == Approx(potential(kSK, x)).epsilon(1e-13).scale(1e-13));
  }
}

TEST_CASE("Metropolis rule") {
  const double x = 0.5;
  // downhill proposal always accepted, even with u close to 1
  CHECK(metropolis_step(x, kSK, 100.0, 0.2, UniformPair{0.0001, 0.99999}) ==
        Approx(x + 0.2 * (0.0001 - 0.5)));
  // infinite temperature accepts everything
  CHECK(metropolis_step(x, kSK, 0.0, 1.0, UniformPair{0.99, 0.99999}) == Approx(x + 0.49));
  // steep uphill at low temperature is rejected
  CHECK(metropolis_step(x, kSK, 1e3, 1.0, UniformPair{0.99, 0.5}) == x);
  CHECK_THROWS_AS(metropolis_step(x, kSK, 1.0, 0.0, UniformPair{0.5, 0.5}), std::invalid_argument);
  ParticleStream rng{1, 2, 3};
  const auto expect = philox_uniforms(1, 2, 3);
  const double y = metropolis_step(x, kSK, 1.0, 1.0, rng);
  CHECK(rng.tick == 4);
  CHECK(y == metropolis_step(x, kSK, 1.0, 1.0, expect));
}

TEST_CASE("ensemble kernel matches the scalar rule") {
  const std::size_t n = 300;
  const std::uint64_t seed = 77;
  const BetaSchedule sched{BetaScheduleKind::linear, 0.5, 20.0, 3.0};
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -1.5 + 3.0 * i / n;
  Ensemble ens(x, seed, 0.7);
  ens.run(kSK, sched, {30});
  for (std::uint64_t t = 0; t < 30; ++t) {
    const double beta = beta_at(sched, t * kMetropolisDt);
    for (std::size_t i = 0; i < n; ++i) x[i] = metropolis_step(x[i], kSK, beta, 0.7, philox_uniforms(seed, i, t));
  }
  for (std::size_t i = 0; i < n; ++i) CHECK(ens.positions()[i] == x[i]);
}

TEST_CASE("detailed balance at fixed temperature") {
  for (double beta : {0.5, 5.0, 50.0}) {
    CAPTURE(beta);
    const BetaSchedule flat{BetaScheduleKind::linear, beta, beta, 1e9};
    // start every particle at the same point, far from equilibrium
    Ensemble ens(std::vector<double>(100000, 0.3), 21, 1.0);
    ens.run(kSK, flat, {3000});
    const auto& xs = ens.positions();
    const auto mv = moments(xs, [](double y) { return potential(kSK, y); });
    const auto mx = moments(xs, [](double y) { return y * y; });
    CHECK(std::abs(mv.mean - equilibrium(kSK, beta).avg_potential) < 5 * mv.se);
    CHECK(std::abs(mx.mean - boltzmann_average(kSK, beta, [](double y) { return y * y; })) < 5 * mx.se);
  }
}

TEST_CASE("stationarity and zero residual in equilibrium") {
  const double beta = std::pow(10.0, 1.18);
  const BetaSchedule flat{BetaScheduleKind::linear, beta, beta, 50.0};
  const auto series = anneal_ensemble(kSK, flat, 1.0, 100000, 3, {10, 20, 30, 40});
  const double target = equilibrium(kSK, beta).avg_potential;
  REQUIRE(series.points.size() == 6);
  for (const auto& p : series.points) {
    CHECK(std::abs(p.mean - target) < 5 * p.std_error);
    CHECK(p.lo <= p.mean);
    CHECK(p.hi >= p.mean);
  }
  const auto r = residual_energy_sa(series, kSK, beta);
  CHECK(std::abs(r.residual) < 5 * r.std_error);
}

TEST_CASE("results do not depend on the thread count") {
  const BetaSchedule sched{BetaScheduleKind::linear, 2.0, 15.0, 40.0};
  AnnealOptions one, many;
  many.threads = 3;
  const auto a = anneal_ensemble(kSK, sched, 1.0, 50001, 8, {10.0, 25.0}, one);
  const auto b = anneal_ensemble(kSK, sched, 1.0, 50001, 8, {10.0, 25.0}, many);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].mean == b.points[i].mean);
    CHECK(a.points[i].lo == b.points[i].lo);
    CHECK(a.points[i].hi == b.points[i].hi);
  }
  const auto c = anneal_ensemble(kSK, sched, 1.0, 50001, 9, {10.0, 25.0}, one);
  CHECK(c.points.back().mean != a.points.back().mean);
}

TEST_CASE("annealing lowers the energy") {
  const auto lo = std::pow(10.0, 0.29), hi = std::pow(10.0, 1.18);
  const BetaSchedule sched{BetaScheduleKind::linear, lo, hi, 10.0};
  const auto s = anneal_ensemble(kSK, sched, 1.0, 1000000, 1, {});
  const auto r = residual_energy_sa(s, kSK, hi);
  CHECK(r.residual > 5 * r.std_error);
  CHECK(s.points.back().mean < s.points.front().mean);
  CHECK_THROWS_AS(anneal_ensemble(kSK, sched, 1.0, 10, 1, {20.0}), std::invalid_argument);
  CHECK_THROWS_AS(anneal_ensemble(kSK, sched, 1.0, 0, 1, {}), std::invalid_argument);
}

TEST_CASE("adaptive step size runs and stays deterministic") {
  const BetaSchedule sched{BetaScheduleKind::quadratic, 2.0, 40.0, 60.0};
  AnnealOptions opt;
  opt.adaptive_step = true;
  const auto a = anneal_ensemble(kSK, sched, 1.0, 20000, 2, {}, opt);
  const auto b = anneal_ensemble(kSK, sched, 1.0, 20000, 2, {}, opt);
  CHECK(a.points.back().mean == b.points.back().mean);
  CHECK(std::isfinite(a.points.back().mean));
}

TEST_CASE("logarithmic schedule") {
  SUBCASE("fit window and exponent sign") {
    const auto r = log_schedule_run(kSK, std::pow(10.0, 0.29), 4.0, 4000, 5, 3000.0);
    CHECK(r.fit.exponent < 0.0);
    CHECK(r.fit.window_lo > kLogFitStart);
    CHECK(r.fit.points >= 3);
    CHECK(r.beta_final == Approx(std::pow(10.0, 0.29) * std::log10(3010.0)));
    CHECK(r.series.points.back().t == Approx(3000.0));
  }
  SUBCASE("too short a run has no window") {
    CHECK_THROWS_AS(log_schedule_run(kSK, 2.0, 4.0, 100, 5, 50.0), std::invalid_argument);
  }
  SUBCASE("large steps collapse onto one curve") {
    std::vector<AnnealSeries> runs;
    for (double s : {2.0, 4.0, 8.0}) runs.push_back(log_schedule_run(kSK, std::pow(10.0, 0.29), s, 20000, 6, 3000.0).series);
    const auto& a = runs[0].points.back();
    for (const auto& r : runs) {
      const auto& b = r.points.back();
      CHECK(std::abs(a.mean - b.mean) < 3 * std::hypot(a.std_error, b.std_error));
    }
  }
}
