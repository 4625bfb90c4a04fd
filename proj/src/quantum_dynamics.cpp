#include "annealab/quantum_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "annealab/eigensolver.hpp"
#include "annealab/errors.hpp"
#include "annealab/hamiltonian.hpp"

namespace annealab {

namespace {

constexpr Complex kI{0.0, 1.0};

// Largest phase h * |V - shift| per substep that keeps the interaction-picture
// RK4 step well inside its stability region.
constexpr double kMaxPotentialPhase = 2.0;

// Outer steps between refreshes of the energy shift.
constexpr long long kShiftRefresh = 10;

}  // namespace

Integrator parse_integrator(std::string_view name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "split_step" || name == "split-step") return Integrator::split_step;
  throw std::invalid_argument("unknown integrator '" + std::string(name) + "'");
}

std::string to_string(Integrator integrator) {
  return integrator == Integrator::rk4 ? "rk4" : "split_step";
}

void PropagationConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (observer_stride < 1) throw std::invalid_argument("observer_stride must be >= 1");
  if (!(max_kinetic_phase > 0.0)) throw std::invalid_argument("max_kinetic_phase must be positive");
  if (!(tail_probability >= 0.0 && tail_probability < 1.0)) {
    throw std::invalid_argument("tail_probability must lie in [0, 1)");
  }
  if (snapshot_every < 0) throw std::invalid_argument("snapshot_every must be >= 0");
  if (snapshot_capacity < 1 || snapshot_capacity > 64) {
    throw std::invalid_argument("snapshot_capacity must lie in 1..64");
  }
}

Propagator::Propagator(const Grid& grid, const PotentialParams& params, MassSchedule schedule,
                       PropagationConfig config)
    : grid_(grid), params_(params), schedule_(schedule), config_(config) {
  params_.validate();
  schedule_.validate();
  config_.validate();
  potential_ = potential_on_grid(grid_, params_);
  const auto [lo, hi] = std::minmax_element(potential_.begin(), potential_.end());
  v_min_ = *lo;
  v_max_ = *hi;
  const std::size_t n = grid_.size();
  for (auto* buf : {&a_, &b_, &c_, &d_, &half1_, &half2_, &potential_half_, &scratch_}) buf->resize(n);
}

void Propagator::kinetic_factor(double theta, ComplexVector& out) const {
  // exp(-i k^2 theta / 2) with k = n dk is z^(n^2), z = exp(-i dk^2 theta / 2).
  // Built by recurrence with an exact restart every 16 modes to bound rounding.
  const std::size_t n = out.size();
  const double phi = 0.5 * grid_.dk() * grid_.dk() * theta;
  const Complex z2 = std::polar(1.0, -2.0 * phi);
  Complex value, ratio;
  for (std::size_t m = 0; m <= n / 2; ++m) {
    if (m % 16 == 0) {
      const double md = static_cast<double>(m);
      value = std::polar(1.0, -phi * md * md);
      ratio = std::polar(1.0, -phi * (2.0 * md + 1.0));
    } else {
      value *= ratio;
      ratio *= z2;
    }
    out[m] = value;
    if (m != 0 && m != n / 2) out[n - m] = value;
  }
}

void Propagator::apply_kinetic_factor(ComplexVector& psi,
                                      const ComplexVector& factor) {
  grid_.forward(psi, psi);
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= factor[j];
  grid_.backward(psi, psi);
}

void Propagator::nonlinear(const ComplexVector& in, ComplexVector& out) const {
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = -kI * (potential_[j] - shift_) * in[j];
}

int Propagator::substep_count(const Wavefunction& psi, double t, double h) {
  const std::size_t n = grid_.size();
  grid_.forward(psi.amplitudes(), scratch_);
  double total = 0.0;
  for (const auto& a : scratch_) total += std::norm(a);
  // Walk inward from the Nyquist mode until the discarded tail is reached.
  const double budget = config_.tail_probability * total;
  double tail = 0.0;
  std::size_t occupied = n / 2;
  for (std::size_t m = n / 2; m > 0; --m) {
    tail += std::norm(scratch_[m]);
    if (m != n / 2) tail += std::norm(scratch_[n - m]);
    if (tail > budget) break;
    occupied = m - 1;
  }
  const double k_occ = grid_.dk() * static_cast<double>(occupied);
  const double m_min = std::min(mass_at(schedule_, t), mass_at(schedule_, t + h));
  double count = std::ceil(h * 0.5 * k_occ * k_occ / m_min / config_.max_kinetic_phase);
  if (config_.integrator == Integrator::rk4) {
    const double spread = std::max(std::abs(v_max_ - shift_), std::abs(v_min_ - shift_));
    count = std::max(count, std::ceil(h * spread / kMaxPotentialPhase));
  }
  return static_cast<int>(std::max(1.0, count));
}

void Propagator::outer_step(Wavefunction& psi, double t, double h) {
  if (config_.integrator == Integrator::rk4 && outer_steps_ % kShiftRefresh == 0) {
    shift_ = energy_expectation(psi, potential_, mass_at(schedule_, t));
  }
  ++outer_steps_;
  const int count = substep_count(psi, t, h);
  const double hs = h / count;
  auto p = psi.amplitudes();
  ComplexVector& work = d_;
  std::copy(p.begin(), p.end(), work.begin());

  if (config_.integrator == Integrator::split_step) {
    if (hs != cached_half_step_) {
      for (std::size_t j = 0; j < work.size(); ++j) {
        potential_half_[j] = std::polar(1.0, -potential_[j] * 0.5 * hs);
      }
      cached_half_step_ = hs;
    }
    for (int s = 0; s < count; ++s) {
      const double tau = t + s * hs;
      const double t_end = s + 1 == count ? t + h : tau + hs;
      kinetic_factor(inverse_mass_integral(schedule_, tau, t_end), half1_);
      for (std::size_t j = 0; j < work.size(); ++j) work[j] *= potential_half_[j];
      apply_kinetic_factor(work, half1_);
      for (std::size_t j = 0; j < work.size(); ++j) work[j] *= potential_half_[j];
    }
  } else {
    for (int s = 0; s < count; ++s) {
      const double tau = t + s * hs;
      const double t_end = s + 1 == count ? t + h : tau + hs;
      const double t_mid = 0.5 * (tau + t_end);
      kinetic_factor(inverse_mass_integral(schedule_, tau, t_mid), half1_);
      kinetic_factor(inverse_mass_integral(schedule_, t_mid, t_end), half2_);
      // a = psi_I, b = stage derivative, c = accumulated update.
      std::copy(work.begin(), work.end(), a_.begin());
      apply_kinetic_factor(a_, half1_);
      nonlinear(work, b_);
      apply_kinetic_factor(b_, half1_);
      for (std::size_t j = 0; j < work.size(); ++j) {
        c_[j] = a_[j] + (hs / 6.0) * b_[j];
        scratch_[j] = a_[j] + (0.5 * hs) * b_[j];
      }
      nonlinear(scratch_, b_);
      for (std::size_t j = 0; j < work.size(); ++j) {
        c_[j] += (hs / 3.0) * b_[j];
        scratch_[j] = a_[j] + (0.5 * hs) * b_[j];
      }
      nonlinear(scratch_, b_);
      for (std::size_t j = 0; j < work.size(); ++j) {
        c_[j] += (hs / 3.0) * b_[j];
        scratch_[j] = a_[j] + hs * b_[j];
      }
      apply_kinetic_factor(scratch_, half2_);
      nonlinear(scratch_, b_);
      apply_kinetic_factor(c_, half2_);
      for (std::size_t j = 0; j < work.size(); ++j) work[j] = c_[j] + (hs / 6.0) * b_[j];
    }
  }
  substeps_ += count;
  std::copy(work.begin(), work.end(), p.begin());
}

void Propagator::step(Wavefunction& psi, double t, double h) {
  if (!(psi.grid() == grid_)) throw std::invalid_argument("state is on a different grid");
  if (!(t >= 0.0 && h > 0.0 && t + h <= schedule_.total_time * (1.0 + 1e-12))) {
    throw std::out_of_range("step outside the schedule");
  }
  outer_step(psi, t, std::min(h, schedule_.total_time - t));
}

void Propagator::advance(Wavefunction& psi, double t0, double t1) {
  if (!(psi.grid() == grid_)) throw std::invalid_argument("state is on a different grid");
  if (!(t0 >= 0.0 && t1 >= t0 && t1 <= schedule_.total_time)) {
    throw std::out_of_range("advance interval outside the schedule");
  }
  const double span = t1 - t0;
  const auto steps = static_cast<long long>(std::ceil(span / config_.dt * (1.0 - 1e-12)));
  for (long long i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * config_.dt;
    outer_step(psi, t, i + 1 == steps ? t1 - t : config_.dt);
  }
}

Trajectory propagate(const Grid& grid, const PotentialParams& params, const MassSchedule& schedule,
                     const Wavefunction& psi0, const PropagationConfig& config) {
  if (!(psi0.grid() == grid)) throw std::invalid_argument("initial state is on a different grid");
  const double n0 = psi0.norm_squared();
  if (std::abs(n0 - 1.0) > 1e-10) throw std::invalid_argument("initial state is not normalized");

  Propagator prop(grid, params, schedule, config);
  Trajectory traj(grid);
  Wavefunction psi = psi0;
  const double total = schedule.total_time;
  const auto steps = static_cast<long long>(std::ceil(total / config.dt * (1.0 - 1e-12)));
  int records = 0;

  auto record = [&](double t) {
    const double drift = std::abs(psi.norm_squared() - n0);
    traj.max_norm_drift = std::max(traj.max_norm_drift, drift);
    for (std::size_t j = 0; j < psi.size(); ++j) {
      if (!std::isfinite(psi[j].real()) || !std::isfinite(psi[j].imag())) {
        throw PropagationError("non-finite amplitude at t=" + std::to_string(t));
      }
    }
    if (drift > config.max_norm_drift) {
      std::ostringstream msg;
      msg << "norm drift " << drift << " exceeds " << config.max_norm_drift << " at t=" << t
          << " (" << to_string(config.integrator) << ", dt=" << config.dt << ")";
      throw PropagationError(msg.str());
    }
    const double m = mass_at(schedule, t);
    const double e = energy_expectation(psi, prop.potential(), m);
    const double w = second_moment(psi);
    const auto amp = current_amplitude(probability_current(psi, m));
    const auto regions = forbidden_regions(grid, params, e);
    const double marker = std::sqrt(w);
    traj.times.push_back(t);
    traj.mass.push_back(m);
    traj.energy.push_back(e);
    traj.width.push_back(w);
    traj.x0.push_back(amp.x0);
    traj.j0.push_back(amp.j0);
    traj.forbidden_probability.push_back(probability_in(psi, regions));
    traj.width_in_forbidden.push_back(
        std::any_of(regions.begin(), regions.end(), [&](const Interval& r) { return r.contains(marker); }));
    if (config.snapshot_every > 0 && records % config.snapshot_every == 0) {
      if (traj.snapshots.size() == static_cast<std::size_t>(config.snapshot_capacity)) {
        traj.snapshots.erase(traj.snapshots.begin());
      }
      traj.snapshots.push_back({t, psi});
    }
    ++records;
  };

  record(0.0);
  for (long long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    const bool last = i + 1 == steps;
    const double t_next = last ? total : static_cast<double>(i + 1) * config.dt;
    prop.step(psi, t, last ? total - t : config.dt);
    if ((i + 1) % config.observer_stride == 0 || i + 1 == steps) record(t_next);
  }
  traj.steps = steps;
  traj.substeps = prop.substeps();
  traj.final_state = std::move(psi);
  return traj;
}

double energy_expectation(const Wavefunction& psi, std::span<const double> potential, double mass) {
  const Grid& g = psi.grid();
  if (potential.size() != psi.size()) throw std::invalid_argument("potential size mismatch");
  ComplexVector phi(g.size());
  g.forward(psi.amplitudes(), phi);
  const auto k = g.wavenumbers();
  double kinetic = 0.0, pot = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    kinetic += std::norm(phi[j]) * k[j] * k[j];
    pot += std::norm(psi[j]) * potential[j];
  }
  return (0.5 * kinetic / mass + pot) * g.dx();
}

double energy_expectation(const Wavefunction& psi, const PotentialParams& params, double mass) {
  return energy_expectation(psi, potential_on_grid(psi.grid(), params), mass);
}

double residual_energy_qa(const Trajectory& trajectory, const PotentialParams& params,
                          double m_final, const Grid& grid) {
  if (trajectory.energy.empty()) throw std::invalid_argument("empty trajectory");
  const double e0 = lowest_eigenpairs(grid, params, m_final, 1).energies[0];
  return trajectory.energy.back() - e0;
}

CurrentField probability_current(const Wavefunction& psi, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  const Wavefunction d = spectral_derivative(psi);
  CurrentField field{psi.grid(), std::vector<double>(psi.size()), mass};
  for (std::size_t j = 0; j < psi.size(); ++j) {
    field.values[j] = (std::conj(psi[j]) * d[j]).imag() / mass;
  }
  return field;
}

CurrentAmplitude current_amplitude(const CurrentField& field) {
  const auto x = field.grid.points();
  CurrentAmplitude best;
  bool found = false;
  for (std::size_t j = 0; j < x.size() && x[j] < 0.0; ++j) {
    if (!found || std::abs(field.values[j]) > std::abs(best.j0)) {
      best = {x[j], field.values[j]};
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("grid has no points with x < 0");
  return best;
}

std::vector<Interval> forbidden_regions(const Grid& grid, const PotentialParams& params,
                                        double energy) {
  const auto x = grid.points();
  std::vector<Interval> out;
  auto excess = [&](std::size_t j) { return potential(params, x[j]) - energy; };
  bool inside = excess(0) > 0.0;
  double start = x[0];
  double prev = excess(0);
  for (std::size_t j = 1; j < x.size(); ++j) {
    const double cur = excess(j);
    const bool now = cur > 0.0;
    if (now != inside) {
      const double cross = x[j - 1] + (x[j] - x[j - 1]) * prev / (prev - cur);
      if (now) {
        start = cross;
      } else {
        out.push_back({start, cross});
      }
      inside = now;
    }
    prev = cur;
  }
  if (inside) out.push_back({start, x.back()});
  return out;
}

std::vector<Interval> forbidden_regions(const Wavefunction& psi, const PotentialParams& params,
                                        double mass) {
  return forbidden_regions(psi.grid(), params, energy_expectation(psi, params, mass));
}

double probability_in(const Wavefunction& psi, const std::vector<Interval>& intervals) {
  const auto x = psi.grid().points();
  const double dx = psi.grid().dx();
  const auto rho = psi.density();
  double total = 0.0;
  for (const auto& r : intervals) {
    // Exact integral of the piecewise-linear interpolant over [lo, hi].
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      const double a = std::max(r.lo, x[j]);
      const double b = std::min(r.hi, x[j + 1]);
      if (b <= a) continue;
      const double slope = (rho[j + 1] - rho[j]) / dx;
      const double fa = rho[j] + slope * (a - x[j]);
      const double fb = rho[j] + slope * (b - x[j]);
      total += 0.5 * (fa + fb) * (b - a);
    }
  }
  return total;
}

std::vector<TunnelingSample> tunneling_fraction(const Trajectory& trajectory) {
  std::vector<TunnelingSample> out(trajectory.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {trajectory.times[i], trajectory.width_in_forbidden[i],
              trajectory.forbidden_probability[i]};
  }
  return out;
}

}  // namespace annealab
