#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace annealab {

/// Polynomial ramps f_1..f_4 with f_n(0) = 0, f_n(1) = 1 and the first n-1
/// derivatives vanishing at both ends.
double ramp(int order, double s);
double ramp_derivative(int order, double s);

enum class MassScheduleKind { poly1, poly2, poly3, poly4, plain_quadratic };

/// Accepts linear|poly1|poly2|poly3|poly4|quadratic.
MassScheduleKind parse_mass_schedule_kind(std::string_view name);
std::string to_string(MassScheduleKind kind);

struct MassSchedule {
  MassScheduleKind kind = MassScheduleKind::poly1;
  double m_initial = 1.0;
  double m_final = 1.0;
  double total_time = 1.0;

  void validate() const;
  /// Schedule shape g(s) on [0, 1].
  double shape(double s) const;
  double shape_derivative(double s) const;
};

/// m(t) = m_i (1 - g) + m_f g, which returns m_i and m_f bit-exactly at the ends.
double mass_at(const MassSchedule& schedule, double t);
double mass_rate(const MassSchedule& schedule, double t);

/// (dm/dt at t = 0, dm/dt at t = T).
std::pair<double, double> schedule_derivative_at_endpoints(const MassSchedule& schedule);

/// Integral of 1/m(t) over [t0, t1] (8-point Gauss-Legendre; exact for a
/// constant mass). Used for the kinetic phase of the propagators.
double inverse_mass_integral(const MassSchedule& schedule, double t0, double t1);

enum class BetaScheduleKind { linear, logarithmic, quadratic };

BetaScheduleKind parse_beta_schedule_kind(std::string_view name);
std::string to_string(BetaScheduleKind kind);

struct BetaSchedule {
  BetaScheduleKind kind = BetaScheduleKind::linear;
  double beta_initial = 1.0;
  double beta_final = 1.0;  ///< unused by the logarithmic kind
  double total_time = 1.0;  ///< unused by the logarithmic kind

  void validate() const;
};

/// linear: beta_i + (beta_f - beta_i) t/T; quadratic: (t/T)^2 in place of t/T;
/// logarithmic: beta_i log10(t + 10).
double beta_at(const BetaSchedule& schedule, double t);

}  // namespace annealab
