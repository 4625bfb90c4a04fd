#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "annealab/schedules.hpp"

using namespace annealab;
using doctest::Approx;

TEST_CASE("ramp polynomials") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(ramp(n, 0.0) == 0.0);
    CHECK(ramp(n, 1.0) == 1.0);
    CHECK(ramp(n, 0.5) == Approx(0.5).epsilon(1e-15));
  }
  CHECK(ramp(3, 0.25) == Approx(0.103515625).epsilon(1e-15));
  CHECK(ramp(2, 0.3) == Approx(0.09 * 2.4));
  CHECK_THROWS_AS(ramp(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ramp(5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ramp(2, 1.5), std::out_of_range);
}

TEST_CASE("ramp derivatives vanish at the ends up to order n-1") {
  const double h = 1e-5;
  for (int n = 2; n <= 4; ++n) {
    // one-sided differences are O(h) accurate
    CHECK(std::abs((ramp(n, h) - ramp(n, 0.0)) / h) < 10 * h);
    CHECK(std::abs((ramp(n, 1.0) - ramp(n, 1.0 - h)) / h) < 10 * h);
    CHECK(ramp_derivative(n, 0.0) == 0.0);
    CHECK(ramp_derivative(n, 1.0) == Approx(0.0).scale(1.0));
    if (n >= 3) {
      // second derivative ~ (f(2h) - 2f(h) + f(0)) / h^2
      CHECK(std::abs((ramp(n, 2 * h) - 2 * ramp(n, h) + ramp(n, 0.0)) / (h * h)) < 100 * h);
      CHECK(std::abs((ramp(n, 1.0) - 2 * ramp(n, 1.0 - h) + ramp(n, 1.0 - 2 * h)) / (h * h)) <
            100 * h);
    }
  }
}

TEST_CASE("ramps are monotone") {
  for (int n = 1; n <= 4; ++n) {
    double prev = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double s = i / 10000.0;
      CHECK(ramp_derivative(n, s) >= 0.0);
      const double f = ramp(n, s);
      CHECK(f >= prev);
      prev = f;
    }
  }
}

TEST_CASE("mass schedules") {
  MassSchedule lin{MassScheduleKind::poly1, 1.0, 1000.0, 50.0};
  CHECK(mass_at(lin, 25.0) == Approx(500.5));
  MassSchedule p2{MassScheduleKind::poly2, 1.0, 1000.0, 50.0};
  CHECK(mass_at(p2, 25.0) == Approx(500.5));
  MassSchedule q{MassScheduleKind::plain_quadratic, 1.0, 1000.0, 50.0};
  CHECK(mass_at(q, 25.0) == Approx(250.75));
  for (auto kind : {MassScheduleKind::poly1, MassScheduleKind::poly2, MassScheduleKind::poly3,
                    MassScheduleKind::poly4, MassScheduleKind::plain_quadratic}) {
    MassSchedule s{kind, 3.7, 1234.5, 321.0};
    CHECK(mass_at(s, 0.0) == 3.7);
    CHECK(mass_at(s, 321.0) == 1234.5);
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double m = mass_at(s, 321.0 * i / 1000.0);
      CHECK(m >= prev);
      prev = m;
    }
  }
  CHECK_THROWS_AS(mass_at(lin, -1.0), std::out_of_range);
  CHECK_THROWS_AS(mass_at(lin, 50.1), std::out_of_range);
  CHECK(parse_mass_schedule_kind("linear") == MassScheduleKind::poly1);
  CHECK(parse_mass_schedule_kind("poly3") == MassScheduleKind::poly3);
  CHECK(parse_mass_schedule_kind("quadratic") == MassScheduleKind::plain_quadratic);
  CHECK_THROWS_AS(parse_mass_schedule_kind("cubic"), std::invalid_argument);
}

TEST_CASE("endpoint derivatives") {
  const double T = 40.0, dm = 999.0;
  auto d1 = schedule_derivative_at_endpoints({MassScheduleKind::poly1, 1, 1000, T});
  CHECK(d1.first == Approx(dm / T));
  CHECK(d1.second == Approx(dm / T));
  auto d3 = schedule_derivative_at_endpoints({MassScheduleKind::poly3, 1, 1000, T});
  CHECK(d3.first == 0.0);
  CHECK(d3.second == Approx(0.0).scale(1.0));
  auto dq = schedule_derivative_at_endpoints({MassScheduleKind::plain_quadratic, 1, 1000, T});
  CHECK(dq.first == 0.0);
  CHECK(dq.second == Approx(2 * dm / T));
}

TEST_CASE("inverse mass integral") {
  MassSchedule s{MassScheduleKind::poly3, 1.0, 1000.0, 100.0};
  // midpoint-rule oracle
  const int n = 200000;
  double sum = 0.0;
  // over one substep-sized interval, as used by the propagator
  for (int i = 0; i < n; ++i) sum += 1.0 / mass_at(s, 40.0 + 0.5 * (i + 0.5) / n);
  CHECK(inverse_mass_integral(s, 40.0, 40.5) == Approx(sum * 0.5 / n).epsilon(1e-10));
  CHECK(inverse_mass_integral(s, 99.8, 100.3) == Approx(inverse_mass_integral(s, 99.8, 100.0) + 0.3 / 1000.0).epsilon(1e-10));
}

TEST_CASE("beta schedules") {
  const double bi = std::pow(10.0, 0.29);
  BetaSchedule lg{BetaScheduleKind::logarithmic, bi, 0.0, 1.0};
  CHECK(beta_at(lg, 0.0) == Approx(bi).epsilon(1e-15));
  CHECK(beta_at(lg, 90.0) == Approx(2 * bi).epsilon(1e-15));
  CHECK(beta_at(lg, 90.0) == Approx(3.899).epsilon(1e-3));
  CHECK_THROWS_AS(beta_at(lg, -1.0), std::out_of_range);
  const double bf = std::pow(10.0, 1.18);
  BetaSchedule lin{BetaScheduleKind::linear, bi, bf, 500.0};
  CHECK(beta_at(lin, 0.0) == bi);
  CHECK(beta_at(lin, 500.0) == bf);
  CHECK(beta_at(lin, 250.0) == Approx(0.5 * (bi + bf)));
  CHECK_THROWS_AS(beta_at(lin, 501.0), std::out_of_range);
  double prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double b = beta_at(lg, i * 37.0);
    CHECK(b >= prev);
    prev = b;
  }
  CHECK(parse_beta_schedule_kind("log") == BetaScheduleKind::logarithmic);
  CHECK_THROWS_AS(parse_beta_schedule_kind("geometric"), std::invalid_argument);
}
