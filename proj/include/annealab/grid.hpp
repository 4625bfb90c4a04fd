#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "annealab/potential.hpp"

namespace annealab {

using Complex = std::complex<double>;

/// 64-byte aligned storage so transforms can use the SIMD code paths.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexVector = std::vector<Complex, AlignedAllocator<Complex>>;

/// Uniform periodic grid x_j = -x_max + j dx, j = 0..n-1, dx = 2 x_max / n.
///
/// Wavenumbers follow DFT ordering (0, dk, ..., -dk) with dk = pi / x_max.
/// The transform pair is unitary over the index:
///   forward:  out_k = n^{-1/2} sum_j in_j exp(-2 pi i j k / n)
///   backward: out_j = n^{-1/2} sum_k in_k exp(+2 pi i j k / n)
/// so sum |in|^2 == sum |out|^2 exactly (up to rounding).
///
/// Grids are immutable and cheap to copy; copies share FFT plans. Transforms
/// may run concurrently from any number of threads.
class Grid {
 public:
  Grid(double x_max, std::size_t n_points);

  double x_max() const;
  std::size_t size() const;
  double dx() const;
  double dk() const;
  std::span<const double> points() const;
  std::span<const double> wavenumbers() const;

  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  void backward(std::span<const Complex> in, std::span<Complex> out) const;

  friend bool operator==(const Grid& a, const Grid& b);

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

bool is_power_of_two(std::size_t n);

/// Complex amplitudes on a Grid; norm^2 = sum |psi_j|^2 dx.
class Wavefunction {
 public:
  explicit Wavefunction(Grid grid);
  Wavefunction(Grid grid, std::span<const Complex> amplitudes);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return amplitudes_.size(); }
  std::span<Complex> amplitudes() { return amplitudes_; }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex& operator[](std::size_t j) { return amplitudes_[j]; }
  const Complex& operator[](std::size_t j) const { return amplitudes_[j]; }

  double norm_squared() const;
  /// Rescales to unit norm; throws std::domain_error for the zero vector.
  void normalize();
  std::vector<double> density() const;

  Wavefunction& operator*=(Complex factor);
  Wavefunction& operator+=(const Wavefunction& other);

 private:
  Grid grid_;
  ComplexVector amplitudes_;
};

/// (-1 / 2m) d^2 psi / dx^2 evaluated spectrally (hbar = 1).
Wavefunction apply_kinetic(const Wavefunction& psi, double mass);

/// d psi / dx evaluated spectrally; the unpaired Nyquist mode is dropped so
/// that real inputs give real outputs.
Wavefunction spectral_derivative(const Wavefunction& psi);

/// sum conj(a_j) b_j dx; throws std::invalid_argument on mismatched grids.
Complex inner_product(const Wavefunction& a, const Wavefunction& b);

/// Momentum amplitudes phi_k in DFT order, scaled so that
/// sum |phi_k|^2 dk == sum |psi_j|^2 dx.
ComplexVector momentum_amplitudes(const Wavefunction& psi);

/// Expectation of x^2 for a normalized state.
double second_moment(const Wavefunction& psi);

struct GridConvergence {
  Grid grid;
  double e0_initial = 0.0;
  double e0_final = 0.0;
  /// Largest relative change of E0 across 1024/2048/4096 points, per endpoint.
  double drift_initial = 0.0;
  double drift_final = 0.0;
};

/// Smallest half-width (to within 5%) whose lowest `levels` eigenstates at
/// `mass`, solved on `n_points` points, all have edge density below
/// `edge_ratio` times their peak.
double select_x_max(const PotentialParams& params, double mass, std::size_t n_points = 1024,
                    double edge_ratio = 1e-12, int levels = 1);

/// Builds the 2048-point grid for an anneal from m_initial to m_final: the
/// half-width is chosen from the lowest three states at m_initial, then E0 at both
/// masses must agree to `tolerance` (relative) across 1024, 2048 and 4096
/// points. Throws ConvergenceError naming the failing endpoint.
GridConvergence converged_grid(const PotentialParams& params, double m_initial, double m_final,
                               double tolerance = 1e-7);

}  // namespace annealab
