#include "annealab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace annealab {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

fftw_complex* as_fftw(const Complex* p) {
  // FFTW never writes through the input pointer of an out-of-place plan.
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

struct Grid::Impl {
  double x_max = 0.0;
  std::size_t n = 0;
  double dx = 0.0;
  double dk = 0.0;
  double scale = 0.0;
  std::vector<double> points;
  std::vector<double> wavenumbers;
  // [aligned][in_place][forward]
  fftw_plan plans[2][2][2] = {};

  Impl(double x_max_, std::size_t n_) : x_max(x_max_), n(n_) {
    dx = 2.0 * x_max / static_cast<double>(n);
    dk = std::numbers::pi / x_max;
    scale = 1.0 / std::sqrt(static_cast<double>(n));
    points.resize(n);
    wavenumbers.resize(n);
    const auto half = static_cast<long>(n / 2);
    for (std::size_t j = 0; j < n; ++j) {
      points[j] = -x_max + static_cast<double>(j) * dx;
      const auto idx = static_cast<long>(j);
      wavenumbers[j] = dk * static_cast<double>(idx < half ? idx : idx - static_cast<long>(n));
    }

    ComplexVector a(n), b(n);
    std::vector<Complex> ua(n + 1), ub(n + 1);
    const int len = static_cast<int>(n);
    std::lock_guard lock(fftw_planner_mutex());
    for (int aligned = 0; aligned < 2; ++aligned) {
      // Offsetting by one element gives an array FFTW treats as misaligned.
      Complex* pa = aligned ? a.data() : ua.data() + 1;
      Complex* pb = aligned ? b.data() : ub.data() + 1;
      const unsigned flags = FFTW_ESTIMATE | (aligned ? 0u : FFTW_UNALIGNED);
      for (int in_place = 0; in_place < 2; ++in_place) {
        for (int fwd = 0; fwd < 2; ++fwd) {
          fftw_plan& p = plans[aligned][in_place][fwd];
          p = fftw_plan_dft_1d(len, as_fftw(pa), as_fftw(in_place ? pa : pb),
                               fwd ? FFTW_FORWARD : FFTW_BACKWARD, flags);
          if (!p) throw std::runtime_error("FFTW planning failed for n=" + std::to_string(n));
        }
      }
    }
  }

  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    for (auto& by_place : plans) {
      for (auto& by_dir : by_place) {
        for (fftw_plan p : by_dir) {
          if (p) fftw_destroy_plan(p);
        }
      }
    }
  }

  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;

  void run(bool forward, std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != n || out.size() != n) {
      throw std::invalid_argument("transform size does not match grid");
    }
    const bool in_place = in.data() == out.data();
    const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(const_cast<Complex*>(in.data()))) == 0 &&
                         fftw_alignment_of(reinterpret_cast<double*>(out.data())) == 0;
    fftw_plan plan = plans[aligned][in_place][forward];
    fftw_execute_dft(plan, as_fftw(in.data()), as_fftw(out.data()));
    for (auto& v : out) v *= scale;
  }
};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Grid::Grid(double x_max, std::size_t n_points) {
  if (!(x_max > 0.0) || !std::isfinite(x_max)) {
    throw std::invalid_argument("grid half-width must be positive");
  }
  if (n_points < 8 || !is_power_of_two(n_points)) {
    throw std::invalid_argument("grid size must be a power of two >= 8, got " +
                                std::to_string(n_points));
  }
  impl_ = std::make_shared<const Impl>(x_max, n_points);
}

double Grid::x_max() const { return impl_->x_max; }
std::size_t Grid::size() const { return impl_->n; }
double Grid::dx() const { return impl_->dx; }
double Grid::dk() const { return impl_->dk; }
std::span<const double> Grid::points() const { return impl_->points; }
std::span<const double> Grid::wavenumbers() const { return impl_->wavenumbers; }

void Grid::forward(std::span<const Complex> in, std::span<Complex> out) const {
  impl_->run(true, in, out);
}

void Grid::backward(std::span<const Complex> in, std::span<Complex> out) const {
  impl_->run(false, in, out);
}

bool operator==(const Grid& a, const Grid& b) {
  return a.impl_ == b.impl_ || (a.size() == b.size() && a.x_max() == b.x_max());
}

Wavefunction::Wavefunction(Grid grid) : grid_(std::move(grid)), amplitudes_(grid_.size()) {}

Wavefunction::Wavefunction(Grid grid, std::span<const Complex> amplitudes)
    : grid_(std::move(grid)), amplitudes_(amplitudes.begin(), amplitudes.end()) {
  if (amplitudes_.size() != grid_.size()) {
    throw std::invalid_argument("amplitude count does not match grid size");
  }
}

double Wavefunction::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return sum * grid_.dx();
}

void Wavefunction::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw std::domain_error("cannot normalize a zero wavefunction");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& a : amplitudes_) a *= s;
}

std::vector<double> Wavefunction::density() const {
  std::vector<double> rho(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), rho.begin(),
                 [](const Complex& a) { return std::norm(a); });
  return rho;
}

Wavefunction& Wavefunction::operator*=(Complex factor) {
  for (auto& a : amplitudes_) a *= factor;
  return *this;
}

Wavefunction& Wavefunction::operator+=(const Wavefunction& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t j = 0; j < amplitudes_.size(); ++j) amplitudes_[j] += other.amplitudes_[j];
  return *this;
}

Wavefunction apply_kinetic(const Wavefunction& psi, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  const Grid& g = psi.grid();
  Wavefunction out(g);
  g.forward(psi.amplitudes(), out.amplitudes());
  const auto k = g.wavenumbers();
  const double c = 0.5 / mass;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= c * k[j] * k[j];
  g.backward(out.amplitudes(), out.amplitudes());
  return out;
}

Wavefunction spectral_derivative(const Wavefunction& psi) {
  const Grid& g = psi.grid();
  Wavefunction out(g);
  g.forward(psi.amplitudes(), out.amplitudes());
  const auto k = g.wavenumbers();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= Complex(0.0, k[j]);
  out[g.size() / 2] = 0.0;
  g.backward(out.amplitudes(), out.amplitudes());
  return out;
}

Complex inner_product(const Wavefunction& a, const Wavefunction& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner product on mismatched grids");
  Complex sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += std::conj(a[j]) * b[j];
  return sum * a.grid().dx();
}

ComplexVector momentum_amplitudes(const Wavefunction& psi) {
  const Grid& g = psi.grid();
  ComplexVector phi(g.size());
  g.forward(psi.amplitudes(), phi);
  const double s = std::sqrt(g.dx() / g.dk());
  for (auto& v : phi) v *= s;
  return phi;
}

double second_moment(const Wavefunction& psi) {
  const auto x = psi.grid().points();
  double sum = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) sum += x[j] * x[j] * std::norm(psi[j]);
  return sum * psi.grid().dx();
}

}  // namespace annealab
