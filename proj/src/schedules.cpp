#include "annealab/schedules.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace annealab {

namespace {

void check_order(int order) {
  if (order < 1 || order > 4) {
    throw std::invalid_argument("ramp order must be 1..4, got " + std::to_string(order));
  }
}

void check_time(double t, double total) {
  if (!(t >= 0.0 && t <= total)) {
    throw std::out_of_range("time " + std::to_string(t) + " outside [0, " +
                            std::to_string(total) + "]");
  }
}

}  // namespace

double ramp(int order, double s) {
  check_order(order);
  if (!(s >= 0.0 && s <= 1.0)) throw std::out_of_range("ramp argument outside [0, 1]");
  switch (order) {
    case 1: return s;
    case 2: return s * s * (3.0 - 2.0 * s);
    case 3: return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    default: return s * s * s * s * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
  }
}

double ramp_derivative(int order, double s) {
  check_order(order);
  if (!(s >= 0.0 && s <= 1.0)) throw std::out_of_range("ramp argument outside [0, 1]");
  const double u = s * (1.0 - s);
  switch (order) {
    case 1: return 1.0;
    case 2: return 6.0 * u;
    case 3: return 30.0 * u * u;
    default: return 140.0 * u * u * u;
  }
}

MassScheduleKind parse_mass_schedule_kind(std::string_view name) {
  if (name == "linear" || name == "poly1") return MassScheduleKind::poly1;
  if (name == "poly2") return MassScheduleKind::poly2;
  if (name == "poly3") return MassScheduleKind::poly3;
  if (name == "poly4") return MassScheduleKind::poly4;
  if (name == "quadratic") return MassScheduleKind::plain_quadratic;
  throw std::invalid_argument("unknown mass schedule '" + std::string(name) + "'");
}

std::string to_string(MassScheduleKind kind) {
  switch (kind) {
    case MassScheduleKind::poly1: return "linear";
    case MassScheduleKind::poly2: return "poly2";
    case MassScheduleKind::poly3: return "poly3";
    case MassScheduleKind::poly4: return "poly4";
    case MassScheduleKind::plain_quadratic: return "quadratic";
  }
  return "?";
}

void MassSchedule::validate() const {
  if (!(m_initial > 0.0) || !(m_final > 0.0)) throw std::invalid_argument("masses must be positive");
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw std::invalid_argument("total time must be positive");
  }
}

double MassSchedule::shape(double s) const {
  if (kind == MassScheduleKind::plain_quadratic) return s * s;
  return ramp(static_cast<int>(kind) + 1, s);
}

double MassSchedule::shape_derivative(double s) const {
  if (kind == MassScheduleKind::plain_quadratic) return 2.0 * s;
  return ramp_derivative(static_cast<int>(kind) + 1, s);
}

double mass_at(const MassSchedule& schedule, double t) {
  check_time(t, schedule.total_time);
  const double g = schedule.shape(t / schedule.total_time);
  return schedule.m_initial * (1.0 - g) + schedule.m_final * g;
}

double mass_rate(const MassSchedule& schedule, double t) {
  check_time(t, schedule.total_time);
  return (schedule.m_final - schedule.m_initial) *
         schedule.shape_derivative(t / schedule.total_time) / schedule.total_time;
}

std::pair<double, double> schedule_derivative_at_endpoints(const MassSchedule& schedule) {
  return {mass_rate(schedule, 0.0), mass_rate(schedule, schedule.total_time)};
}

double inverse_mass_integral(const MassSchedule& schedule, double t0, double t1) {
  if (schedule.m_initial == schedule.m_final) return (t1 - t0) / schedule.m_initial;
  static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290,
                                               0.7966664774136267, 0.9602898564975363};
  static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};
  const double mid = 0.5 * (t0 + t1);
  const double half = 0.5 * (t1 - t0);
  const double total = schedule.total_time;
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double a = std::min(total, std::max(0.0, mid - half * nodes[i]));
    const double b = std::min(total, std::max(0.0, mid + half * nodes[i]));
    sum += weights[i] * (1.0 / mass_at(schedule, a) + 1.0 / mass_at(schedule, b));
  }
  return half * sum;
}

BetaScheduleKind parse_beta_schedule_kind(std::string_view name) {
  if (name == "linear") return BetaScheduleKind::linear;
  if (name == "log" || name == "logarithmic") return BetaScheduleKind::logarithmic;
  if (name == "quadratic") return BetaScheduleKind::quadratic;
  throw std::invalid_argument("unknown beta schedule '" + std::string(name) + "'");
}

std::string to_string(BetaScheduleKind kind) {
  switch (kind) {
    case BetaScheduleKind::linear: return "linear";
    case BetaScheduleKind::logarithmic: return "logarithmic";
    case BetaScheduleKind::quadratic: return "quadratic";
  }
  return "?";
}

void BetaSchedule::validate() const {
  if (!(beta_initial >= 0.0)) throw std::invalid_argument("initial beta must be nonnegative");
  if (kind != BetaScheduleKind::logarithmic) {
    if (!(beta_final >= 0.0)) throw std::invalid_argument("final beta must be nonnegative");
    if (!(total_time > 0.0)) throw std::invalid_argument("total time must be positive");
  }
}

double beta_at(const BetaSchedule& schedule, double t) {
  if (schedule.kind == BetaScheduleKind::logarithmic) {
    if (!(t >= 0.0)) throw std::out_of_range("time must be nonnegative");
    return schedule.beta_initial * std::log10(t + 10.0);
  }
  check_time(t, schedule.total_time);
  double g = t / schedule.total_time;
  if (schedule.kind == BetaScheduleKind::quadratic) g *= g;
  return schedule.beta_initial * (1.0 - g) + schedule.beta_final * g;
}

}  // namespace annealab
