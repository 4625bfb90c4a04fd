#include "annealab/classical_mc.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#if defined(__AVX512F__) && defined(__AVX512DQ__)
#include <immintrin.h>
#define ANNEALAB_PHILOX_AVX512 1
#endif

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "annealab/errors.hpp"
#include "annealab/parallel.hpp"

namespace annealab {

namespace {

constexpr double kTruncation = 46.0;
constexpr double kRoundMagic = 0x1.8p52;  // adding this rounds to nearest integer

// cos(2 pi y): quadrant reduction to |a| <= pi/4, then Taylor series.
inline double cos_turns(double y) {
  const double t = 4.0 * y + kRoundMagic;
  const auto quadrant = std::bit_cast<std::uint64_t>(t) & 3u;
  const double q = t - kRoundMagic;
  const double a = 2.0 * std::numbers::pi * (y - 0.25 * q);
  const double a2 = a * a;
  double c = 1.0 / 20922789888000.0;  // 1/16!
  c = c * a2 - 1.0 / 87178291200.0;
  c = c * a2 + 1.0 / 479001600.0;
  c = c * a2 - 1.0 / 3628800.0;
  c = c * a2 + 1.0 / 40320.0;
  c = c * a2 - 1.0 / 720.0;
  c = c * a2 + 1.0 / 24.0;
  c = c * a2 - 0.5;
  c = c * a2 + 1.0;
  double s = 1.0 / 355687428096000.0;  // 1/17!
  s = s * a2 - 1.0 / 1307674368000.0;
  s = s * a2 + 1.0 / 6227020800.0;
  s = s * a2 - 1.0 / 39916800.0;
  s = s * a2 + 1.0 / 362880.0;
  s = s * a2 - 1.0 / 5040.0;
  s = s * a2 + 1.0 / 120.0;
  s = s * a2 - 1.0 / 6.0;
  s = (s * a2 + 1.0) * a;
  // Branch-free select and sign flip keep the caller's loop vectorizable.
  const std::uint64_t pick = std::uint64_t{0} - (quadrant & 1u);
  const std::uint64_t v = (std::bit_cast<std::uint64_t>(s) & pick) |
                          (std::bit_cast<std::uint64_t>(c) & ~pick);
  return std::bit_cast<double>(v ^ (((quadrant + 1u) & 2u) << 62));
}

// exp(z) for z in [-700, 0].
inline double exp_nonpositive(double z) {
  constexpr double log2e = std::numbers::log2e;
  constexpr double ln2_hi = 0x1.62e42fee00000p-1;
  constexpr double ln2_lo = 0x1.a39ef35793c76p-33;
  const double t = z * log2e + kRoundMagic;
  const auto n = static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(t) -
                                           std::bit_cast<std::uint64_t>(kRoundMagic));
  const double q = t - kRoundMagic;
  const double r = (z - q * ln2_hi) - q * ln2_lo;
  double p = 1.0 / 6227020800.0;  // 1/13!
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const double scale = std::bit_cast<double>(static_cast<std::uint64_t>(n + 1023) << 52);
  return p * scale;
}

struct KernelPotential {
  double half_k;
  double half_h;
  double inv_w0;

  explicit KernelPotential(const PotentialParams& p)
      : half_k(0.5 * p.k), half_h(0.5 * p.h0), inv_w0(1.0 / p.w0) {}

  double operator()(double x) const {
    return half_k * x * x + half_h * (1.0 - cos_turns(x * inv_w0));
  }
};

inline double acceptance_probability(double beta, double dv) {
  double z = -beta * dv;
  z = z > 0.0 ? 0.0 : z;
  z = z < -700.0 ? -700.0 : z;
  return exp_nonpositive(z);
}

void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("inverse temperature must be positive and finite");
  }
}

double average_potential(const PotentialParams& params, double beta) {
  return boltzmann_average(params, beta, [&](double x) { return potential(params, x); });
}

}  // namespace

double boltzmann_support(const PotentialParams& params, double beta) {
  require_beta(beta);
  return std::sqrt(2.0 * kTruncation / (beta * params.k));
}

double boltzmann_average(const PotentialParams& params, double beta,
                         const std::function<double(double)>& integrand) {
  params.validate();
  const double x_max = boltzmann_support(params, beta);
  // Panels of w0/2 resolve the corrugation; cap the count for tiny beta.
  const double width = std::max(0.5 * params.w0, 2.0 * x_max / 4096.0);
  const auto panels = static_cast<std::size_t>(std::ceil(2.0 * x_max / width));
  const double h = 2.0 * x_max / static_cast<double>(panels);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  double num = 0.0, den = 0.0, num_err = 0.0, den_err = 0.0, num_abs = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = -x_max + static_cast<double>(i) * h;
    const double b = i + 1 == panels ? x_max : a + h;
    double e1 = 0.0, e2 = 0.0, l1 = 0.0;
    den += Quad::integrate([&](double x) { return std::exp(-beta * potential(params, x)); }, a, b,
                           15, 1e-12, &e1);
    num += Quad::integrate(
        [&](double x) { return integrand(x) * std::exp(-beta * potential(params, x)); }, a, b, 15,
        1e-12, &e2, &l1);
    den_err += e1;
    num_err += e2;
    num_abs += l1;
  }
  if (!(den > 0.0) || !std::isfinite(num)) {
    throw ConvergenceError("Boltzmann quadrature produced a non-finite result");
  }
  const double rel = den_err / den + num_err / std::max(num_abs, 1e-300);
  if (rel > 1e-8) {
    throw ConvergenceError("Boltzmann quadrature error estimate " + std::to_string(rel) +
                           " exceeds 1e-8 at beta=" + std::to_string(beta));
  }
  return num / den;
}

EquilibriumResult equilibrium(const PotentialParams& params, double beta) {
  params.validate();
  const double x_max = boltzmann_support(params, beta);
  const double width = std::max(0.5 * params.w0, 2.0 * x_max / 4096.0);
  const auto panels = static_cast<std::size_t>(std::ceil(2.0 * x_max / width));
  const double h = 2.0 * x_max / static_cast<double>(panels);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  double z = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = -x_max + static_cast<double>(i) * h;
    const double b = i + 1 == panels ? x_max : a + h;
    z += Quad::integrate([&](double x) { return std::exp(-beta * potential(params, x)); }, a, b,
                         15, 1e-12);
  }
  EquilibriumResult r;
  r.beta = beta;
  r.avg_potential = average_potential(params, beta);
  r.internal_energy = 0.5 / beta + r.avg_potential;
  r.partition_log = std::log(z);
  return r;
}

double alpha_eq(const PotentialParams& params, double beta, double step_decades) {
  require_beta(beta);
  if (!(step_decades > 0.0)) throw std::invalid_argument("step must be positive");
  const double f = std::pow(10.0, step_decades);
  const double up = std::log10(average_potential(params, beta * f));
  const double down = std::log10(average_potential(params, beta / f));
  return (up - down) / (2.0 * step_decades);
}

double alpha_eq_secant(const PotentialParams& params, double beta_a, double beta_b) {
  require_beta(beta_a);
  require_beta(beta_b);
  if (beta_a == beta_b) throw std::invalid_argument("secant needs two distinct temperatures");
  return (std::log10(average_potential(params, beta_b)) -
          std::log10(average_potential(params, beta_a))) /
         (std::log10(beta_b) - std::log10(beta_a));
}

std::vector<double> sample_boltzmann(const PotentialParams& params, double beta, std::size_t n,
                                     std::uint64_t seed) {
  params.validate();
  const double x_max = boltzmann_support(params, beta);
  constexpr std::size_t nodes = std::size_t{1} << 16;
  const double dx = 2.0 * x_max / static_cast<double>(nodes - 1);
  std::vector<double> cdf(nodes, 0.0);
  double prev = std::exp(-beta * potential(params, -x_max));
  for (std::size_t j = 1; j < nodes; ++j) {
    const double w = std::exp(-beta * potential(params, -x_max + static_cast<double>(j) * dx));
    cdf[j] = cdf[j - 1] + 0.5 * (prev + w) * dx;
    prev = w;
  }
  const double total = cdf.back();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = philox_uniforms(seed, i, kInitialDrawTick).first * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const auto j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        it - cdf.begin() - 1, 0, static_cast<std::ptrdiff_t>(nodes) - 2));
    const double span = cdf[j + 1] - cdf[j];
    const double frac = span > 0.0 ? (target - cdf[j]) / span : 0.5;
    out[i] = -x_max + (static_cast<double>(j) + std::clamp(frac, 0.0, 1.0)) * dx;
  }
  return out;
}

double kernel_potential(const PotentialParams& params, double x) {
  return KernelPotential(params)(x);
}

double metropolis_step(double x, const PotentialParams& params, double beta, double s,
                       UniformPair u) {
  if (!(s > 0.0)) throw std::invalid_argument("step size must be positive");
  const KernelPotential pot(params);
  const double xp = x + s * (u.first - 0.5);
  return u.second < acceptance_probability(beta, pot(xp) - pot(x)) ? xp : x;
}

double metropolis_step(double x, const PotentialParams& params, double beta, double s,
                       ParticleStream& rng) {
  return metropolis_step(x, params, beta, s, rng.next());
}

namespace {

constexpr std::size_t kChunk = 2048;
constexpr std::uint64_t kAdaptInterval = 100;

struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
  int sub = 0;
};

// Chunks never straddle a sub-ensemble, so per-sub sums reduce in fixed order.
std::vector<Chunk> make_chunks(std::size_t n) {
  std::vector<Chunk> chunks;
  for (int s = 0; s < kSubEnsembles; ++s) {
    const std::size_t lo = n * static_cast<std::size_t>(s) / kSubEnsembles;
    const std::size_t hi = n * static_cast<std::size_t>(s + 1) / kSubEnsembles;
    for (std::size_t b = lo; b < hi; b += kChunk) chunks.push_back({b, std::min(hi, b + kChunk), s});
  }
  return chunks;
}

// philox_uniforms for particles first..first+n-1 at one tick.
void uniforms_block(std::uint64_t seed, std::uint64_t first, std::uint64_t tick, std::size_t n,
                    double* __restrict u1, double* __restrict u2) {
  std::size_t i = 0;
#ifdef ANNEALAB_PHILOX_AVX512
  // Eight particles per vector, one 32-bit word per 64-bit lane, so
  // vpmuludq yields the full 64-bit products directly.
  const __m512i low = _mm512_set1_epi64(0xFFFFFFFF);
  const __m512i mul_a = _mm512_set1_epi64(Philox4x32::kMulA);
  const __m512i mul_b = _mm512_set1_epi64(Philox4x32::kMulB);
  const __m512i lane = _mm512_set_epi64(7, 6, 5, 4, 3, 2, 1, 0);
  const __m512d half = _mm512_set1_pd(0.5);
  const __m512d scale = _mm512_set1_pd(0x1.0p-52);
  __m512i key0[10], key1[10];
  std::uint32_t k0 = static_cast<std::uint32_t>(seed), k1 = static_cast<std::uint32_t>(seed >> 32);
  for (int r = 0; r < 10; ++r) {
    key0[r] = _mm512_set1_epi64(k0);
    key1[r] = _mm512_set1_epi64(k1);
    k0 += Philox4x32::kWeylA;
    k1 += Philox4x32::kWeylB;
  }
  const __m512i tick_lo = _mm512_set1_epi64(static_cast<std::uint32_t>(tick));
  const __m512i tick_hi = _mm512_set1_epi64(static_cast<std::uint32_t>(tick >> 32));
  for (; i + 8 <= n; i += 8) {
    const __m512i particle = _mm512_add_epi64(_mm512_set1_epi64(first + i), lane);
    __m512i c0 = tick_lo, c1 = tick_hi;
    __m512i c2 = _mm512_and_si512(particle, low);
    __m512i c3 = _mm512_srli_epi64(particle, 32);
    for (int r = 0; r < 10; ++r) {
      const __m512i p0 = _mm512_mul_epu32(c0, mul_a);
      const __m512i p1 = _mm512_mul_epu32(c2, mul_b);
      c0 = _mm512_xor_si512(_mm512_xor_si512(_mm512_srli_epi64(p1, 32), c1), key0[r]);
      c1 = _mm512_and_si512(p1, low);
      c2 = _mm512_xor_si512(_mm512_xor_si512(_mm512_srli_epi64(p0, 32), c3), key1[r]);
      c3 = _mm512_and_si512(p0, low);
    }
    const __m512i b1 = _mm512_or_si512(_mm512_slli_epi64(c0, 20), _mm512_srli_epi64(c1, 12));
    const __m512i b2 = _mm512_or_si512(_mm512_slli_epi64(c2, 20), _mm512_srli_epi64(c3, 12));
    _mm512_storeu_pd(u1 + i, _mm512_mul_pd(_mm512_add_pd(_mm512_cvtepi64_pd(b1), half), scale));
    _mm512_storeu_pd(u2 + i, _mm512_mul_pd(_mm512_add_pd(_mm512_cvtepi64_pd(b2), half), scale));
  }
#endif
  for (; i < n; ++i) {
    const UniformPair u = philox_uniforms(seed, first + i, tick);
    u1[i] = u.first;
    u2[i] = u.second;
  }
}

// Advances particles [0, len) of one chunk through ticks [t0, t1).
// Returns the number of accepted moves.
std::uint64_t sweep(double* __restrict x, double* __restrict v, std::size_t len,
                    std::uint64_t first_particle, std::uint64_t seed, std::uint64_t t0,
                    std::uint64_t t1, double s, const KernelPotential& pot,
                    const BetaSchedule& schedule, double dt) {
  std::uint64_t accepted = 0;
  double u1[kChunk], u2[kChunk];
  for (std::uint64_t tick = t0; tick < t1; ++tick) {
    const double beta = beta_at(schedule, static_cast<double>(tick) * dt);
    uniforms_block(seed, first_particle, tick, len, u1, u2);
    for (std::size_t i = 0; i < len; ++i) {
      const UniformPair u{u1[i], u2[i]};
      const double xp = x[i] + s * (u.first - 0.5);
      const double vp = pot(xp);
      const bool accept = u.second < acceptance_probability(beta, vp - v[i]);
      x[i] = accept ? xp : x[i];
      v[i] = accept ? vp : v[i];
      accepted += accept ? 1u : 0u;
    }
  }
  return accepted;
}

}  // namespace

Ensemble::Ensemble(std::vector<double> positions, std::uint64_t seed, double step_size,
                   AnnealOptions options)
    : positions_(std::move(positions)), seed_(seed), step_size_(step_size), options_(options) {
  if (positions_.empty()) throw std::invalid_argument("ensemble needs at least one particle");
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(options.dt > 0.0)) throw std::invalid_argument("tick length must be positive");
}

std::vector<SeriesPoint> Ensemble::run(const PotentialParams& params, const BetaSchedule& schedule,
                                       const std::vector<std::uint64_t>& record_ticks) {
  params.validate();
  schedule.validate();
  if (!std::is_sorted(record_ticks.begin(), record_ticks.end()) ||
      (!record_ticks.empty() && record_ticks.front() < tick_)) {
    throw std::invalid_argument("record ticks must be ascending and not in the past");
  }
  const KernelPotential pot(params);
  const auto n = positions_.size();
  if (!potentials_valid_ || params.k != cached_params_.k || params.h0 != cached_params_.h0 ||
      params.w0 != cached_params_.w0) {
    potentials_.resize(n);
    for (std::size_t i = 0; i < n; ++i) potentials_[i] = pot(positions_[i]);
    cached_params_ = params;
    potentials_valid_ = true;
  }
  const auto chunks = make_chunks(n);
  if (chunk_steps_.size() != chunks.size()) chunk_steps_.assign(chunks.size(), step_size_);
  const std::size_t records = record_ticks.size();
  // partial[c * records + r] = {sum V, sum V^2}
  std::vector<double> sum(chunks.size() * records), sum2(chunks.size() * records);
  const std::uint64_t start = tick_;
  const double dt = options_.dt;
  const bool adaptive = options_.adaptive_step;

  parallel_for(chunks.size(), options_.threads, [&](std::size_t c) {
    const Chunk& ch = chunks[c];
    double* x = positions_.data() + ch.begin;
    double* v = potentials_.data() + ch.begin;
    const std::size_t len = ch.end - ch.begin;
    double s = chunk_steps_[c];
    std::uint64_t now = start;
    for (std::size_t r = 0; r < records; ++r) {
      const std::uint64_t target = record_ticks[r];
      while (now < target) {
        const std::uint64_t stop = adaptive ? std::min(target, now + kAdaptInterval) : target;
        const auto acc = sweep(x, v, len, ch.begin, seed_, now, stop, s, pot, schedule, dt);
        if (adaptive) {
          const double rate = static_cast<double>(acc) / static_cast<double>(len * (stop - now));
          s *= rate > 0.5 ? 1.1 : 1.0 / 1.1;
        }
        now = stop;
      }
      double a = 0.0, b = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        a += v[i];
        b += v[i] * v[i];
      }
      sum[c * records + r] = a;
      sum2[c * records + r] = b;
    }
    chunk_steps_[c] = s;
  });
  if (!record_ticks.empty()) tick_ = record_ticks.back();

  std::vector<SeriesPoint> out(records);
  for (std::size_t r = 0; r < records; ++r) {
    double sub_sum[kSubEnsembles] = {};
    double sub_sum2[kSubEnsembles] = {};
    std::size_t sub_n[kSubEnsembles] = {};
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      sub_sum[chunks[c].sub] += sum[c * records + r];
      sub_sum2[chunks[c].sub] += sum2[c * records + r];
      sub_n[chunks[c].sub] += chunks[c].end - chunks[c].begin;
    }
    double total = 0.0, total2 = 0.0;
    double lo = INFINITY, hi = -INFINITY;
    for (int s = 0; s < kSubEnsembles; ++s) {
      total += sub_sum[s];
      total2 += sub_sum2[s];
      if (sub_n[s] == 0) continue;
      const double m = sub_sum[s] / static_cast<double>(sub_n[s]);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    const double dn = static_cast<double>(n);
    SeriesPoint& p = out[r];
    p.t = static_cast<double>(record_ticks[r]) * dt;
    p.mean = total / dn;
    p.lo = lo;
    p.hi = hi;
    const double var = std::max(0.0, total2 / dn - p.mean * p.mean);
    p.std_error = n > 1 ? std::sqrt(var / (dn - 1.0)) : 0.0;
  }
  return out;
}

namespace {

std::uint64_t to_tick(double t, double dt) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("record times must be >= 0");
  return static_cast<std::uint64_t>(std::llround(t / dt));
}

}  // namespace

AnnealSeries anneal_ensemble(const PotentialParams& params, const BetaSchedule& schedule, double s,
                             std::size_t n, std::uint64_t seed,
                             const std::vector<double>& record_times,
                             const AnnealOptions& options) {
  schedule.validate();
  if (n < 1) throw std::invalid_argument("ensemble needs at least one particle");
  std::vector<std::uint64_t> ticks{0};
  for (double t : record_times) ticks.push_back(to_tick(t, options.dt));
  if (schedule.kind != BetaScheduleKind::logarithmic) {
    const auto end = to_tick(schedule.total_time, options.dt);
    for (auto t : ticks) {
      if (t > end) throw std::invalid_argument("record time beyond the end of the schedule");
    }
    ticks.push_back(end);
  }
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());

  const double beta0 = beta_at(schedule, 0.0);
  Ensemble ensemble(sample_boltzmann(params, beta0, n, seed), seed, s, options);
  AnnealSeries series;
  series.points = ensemble.run(params, schedule, ticks);
  series.particles = n;
  series.step_size = s;
  series.seed = seed;
  return series;
}

ResidualSample residual_energy_sa(const AnnealSeries& series, const PotentialParams& params,
                                  double beta_final) {
  if (series.points.empty()) throw std::invalid_argument("empty annealing series");
  const double target = average_potential(params, beta_final);
  const SeriesPoint& last = series.points.back();
  return {last.t, last.mean - target, last.lo - target, last.hi - target, last.std_error};
}

LogScheduleResult log_schedule_run(const PotentialParams& params, double beta_i, double s,
                                   std::size_t n, std::uint64_t seed, double t_max,
                                   const AnnealOptions& options) {
  require_beta(beta_i);
  if (!(t_max > 10.0)) throw std::invalid_argument("t_max must exceed 10");
  // Records uniform in log10 log10 t with spacing 0.005, from t = 10.
  const double top = std::log10(std::log10(t_max));
  std::vector<double> times;
  for (int i = 0;; ++i) {
    const double u = 0.005 * i;
    if (u >= top) break;
    times.push_back(std::pow(10.0, std::pow(10.0, u)));
  }
  times.push_back(t_max);

  BetaSchedule schedule{BetaScheduleKind::logarithmic, beta_i, beta_i, t_max};
  LogScheduleResult out;
  out.series = anneal_ensemble(params, schedule, s, n, seed, times, options);
  out.beta_final = beta_at(schedule, out.series.points.back().t);

  std::vector<double> fx, fy;
  for (const auto& p : out.series.points) {
    if (p.t <= 10.0) continue;
    const double u = std::log10(std::log10(p.t));
    if (u > kLogFitStart && p.mean > 0.0) {
      fx.push_back(u);
      fy.push_back(std::log10(p.mean));
    }
  }
  if (fx.size() < 3) {
    throw std::invalid_argument("insufficient window: " + std::to_string(fx.size()) +
                                " records with log10 log10 t > 0.5");
  }
  out.fit = linear_fit(fx, fy);
  return out;
}

}  // namespace annealab
