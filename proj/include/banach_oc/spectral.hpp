#pragma once

// Function calculus on the circle: uniform grid, rectangle-rule quadrature,
// discrete Fourier transform (FFTW) and circular convolution.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "banach_oc/errors.hpp"

namespace banach_oc {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Uniform grid theta_j = 2*pi*j/n on the circle; n even and >= 4.
class CircleGrid {
 public:
  explicit CircleGrid(std::size_t n) : n_(n) {
    if (n < 4 || n % 2 != 0) {
      throw DomainError("CircleGrid: n must be even and >= 4, got " + std::to_string(n));
    }
  }

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return two_pi / static_cast<double>(n_); }
  double theta(std::size_t j) const noexcept { return two_pi * static_cast<double>(j) / static_cast<double>(n_); }

  friend bool operator==(const CircleGrid&, const CircleGrid&) = default;

 private:
  std::size_t n_;
};

/// Real samples of a function on a CircleGrid.
class GridFunction {
 public:
  GridFunction(CircleGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw DimensionError("GridFunction: " + std::to_string(values_.size()) + " samples for grid of size " +
                           std::to_string(grid_.size()));
    }
    if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
      throw DomainError("GridFunction: non-finite sample");
    }
  }

  /// Samples fn(theta_j).
  template <typename Fn>
  static GridFunction sample(CircleGrid grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = fn(grid.theta(j));
    return GridFunction(grid, std::move(v));
  }

  /// Takes ownership of values without the finiteness check; used on hot numerical paths
  /// whose callers test finiteness themselves.
  static GridFunction adopt(CircleGrid grid, std::vector<double> values) {
    if (values.size() != grid.size()) throw DimensionError("GridFunction: sample count mismatch");
    return GridFunction(unchecked, grid, std::move(values));
  }

  static GridFunction constant(CircleGrid grid, double c) {
    return GridFunction(unchecked, grid, std::vector<double>(grid.size(), c));
  }

  const CircleGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Applies fn pointwise.
  template <typename Fn>
  GridFunction map(Fn&& fn) const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), fn);
    return GridFunction(unchecked, grid_, std::move(out));
  }

  GridFunction& operator+=(const GridFunction& other) {
    require_same_grid(other);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& other) {
    require_same_grid(other);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
    return *this;
  }
  GridFunction& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  /// this += s * other
  GridFunction& add_scaled(double s, const GridFunction& other) {
    require_same_grid(other);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += s * other.values_[j];
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
  friend GridFunction operator-(GridFunction a) { return a *= -1.0; }

  /// Pointwise product.
  friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    a.require_same_grid(b);
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = a.values_[j] * b.values_[j];
    return GridFunction(unchecked, a.grid_, std::move(out));
  }

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

  void require_same_grid(const GridFunction& other) const {
    if (!(grid_ == other.grid_)) {
      throw DimensionError("grid mismatch: " + std::to_string(grid_.size()) + " vs " +
                           std::to_string(other.grid_.size()));
    }
  }

 private:
  struct Unchecked {};
  static constexpr Unchecked unchecked{};

  GridFunction(Unchecked, CircleGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {}

  CircleGrid grid_;
  std::vector<double> values_;
};

inline bool is_finite(const GridFunction& y) { return y.all_finite(); }

/// (2*pi/n) * sum_j y(theta_j); exact for trigonometric polynomials of degree < n.
inline double quadrature(const GridFunction& y) {
  double sum = 0.0;
  for (double v : y.values()) sum += v;
  return y.grid().spacing() * sum;
}

/// L2(0, 2*pi) inner product under the rectangle rule.
inline double l2_inner(const GridFunction& a, const GridFunction& b) {
  a.require_same_grid(b);
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return a.grid().spacing() * sum;
}

inline double l2_norm(const GridFunction& a) { return std::sqrt(l2_inner(a, a)); }

namespace detail {

// The FFTW planner is not thread-safe; execution with new-array calls on an existing
// plan is. Plans are made with FFTW_UNALIGNED so the same codelets run for every
// buffer, which keeps results independent of where the data happens to live.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    const std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using FftwPlan = std::shared_ptr<fftw_plan_s>;

template <typename MakePlan>
FftwPlan make_fftw_plan(MakePlan&& make) {
  const std::lock_guard lock(fftw_planner_mutex());
  fftw_plan p = make();
  if (p == nullptr) throw std::runtime_error("FFTW: failed to create plan");
  return FftwPlan(p, FftwPlanDeleter{});
}

inline fftw_complex* as_fftw(std::complex<double>* z) { return reinterpret_cast<fftw_complex*>(z); }

constexpr unsigned fftw_flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace detail

/// Complex DFT of fixed length (FFTW).
/// forward: Y_k = sum_j y_j e^{-2 pi i jk/n};  inverse: y_j = (1/n) sum_k Y_k e^{+2 pi i jk/n}.
class FourierTransform {
 public:
  using Complex = std::complex<double>;

  explicit FourierTransform(std::size_t n) : n_(n) {
    if (n == 0) throw DomainError("FourierTransform: empty length");
    std::vector<Complex> scratch(n);
    const int len = static_cast<int>(n);
    auto* buf = detail::as_fftw(scratch.data());
    forward_ = detail::make_fftw_plan([&] { return fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, detail::fftw_flags); });
    backward_ = detail::make_fftw_plan([&] { return fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, detail::fftw_flags); });
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<Complex> data) const { execute(forward_, data); }

  void inverse(std::span<Complex> data) const {
    execute(backward_, data);
    const double scale = 1.0 / static_cast<double>(n_);
    for (Complex& z : data) z *= scale;
  }

 private:
  void execute(const detail::FftwPlan& plan, std::span<Complex> data) const {
    if (data.size() != n_) throw DimensionError("FourierTransform: length mismatch");
    auto* buf = detail::as_fftw(data.data());
    fftw_execute_dft(plan.get(), buf, buf);
  }

  std::size_t n_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

inline std::vector<std::complex<double>> dft(const GridFunction& y) {
  std::vector<std::complex<double>> data(y.values().begin(), y.values().end());
  FourierTransform(y.size()).forward(data);
  return data;
}

/// Real part of the inverse DFT, sampled on grid.
inline GridFunction inverse_dft(CircleGrid grid, std::vector<std::complex<double>> spectrum) {
  FourierTransform(grid.size()).inverse(spectrum);
  std::vector<double> out(spectrum.size());
  std::transform(spectrum.begin(), spectrum.end(), out.begin(), [](const auto& z) { return z.real(); });
  return GridFunction(grid, std::move(out));
}

/// Convolution against a fixed kernel, with the kernel spectrum and the real-input
/// transform plans cached.
/// apply(y)(theta_j) = (2*pi/n) * sum_l w(theta_j - theta_l) y(theta_l).
class CircularConvolver {
 public:
  using Complex = std::complex<double>;

  explicit CircularConvolver(const GridFunction& kernel) : grid_(kernel.grid()), spectrum_(kernel.size() / 2 + 1) {
    const int n = static_cast<int>(kernel.size());
    std::vector<double> real(kernel.values().begin(), kernel.values().end());
    std::vector<Complex> half(spectrum_.size());
    r2c_ = detail::make_fftw_plan(
        [&] { return fftw_plan_dft_r2c_1d(n, real.data(), detail::as_fftw(half.data()), detail::fftw_flags); });
    c2r_ = detail::make_fftw_plan(
        [&] { return fftw_plan_dft_c2r_1d(n, detail::as_fftw(half.data()), real.data(), detail::fftw_flags); });
    // FFTW_ESTIMATE leaves the arrays alone while planning
    fftw_execute_dft_r2c(r2c_.get(), real.data(), detail::as_fftw(spectrum_.data()));
    // quadrature weight and the 1/n of the unnormalized inverse
    const double scale = grid_.spacing() / static_cast<double>(n);
    for (auto& z : spectrum_) z *= scale;
  }

  const CircleGrid& grid() const noexcept { return grid_; }

  GridFunction apply(const GridFunction& y) const {
    if (!(y.grid() == grid_)) throw DimensionError("circular convolution: grid mismatch");
    std::vector<double> buf(y.values().begin(), y.values().end());
    std::vector<Complex> p(spectrum_.size());
    fftw_execute_dft_r2c(r2c_.get(), buf.data(), detail::as_fftw(p.data()));
    for (std::size_t k = 0; k < p.size(); ++k) p[k] *= spectrum_[k];
    fftw_execute_dft_c2r(c2r_.get(), detail::as_fftw(p.data()), buf.data());
    return GridFunction::adopt(grid_, std::move(buf));
  }

 private:
  CircleGrid grid_;
  std::vector<Complex> spectrum_;
  detail::FftwPlan r2c_;
  detail::FftwPlan c2r_;
};

/// Grid sampling of (w * y)(theta) = integral of w(theta - s) y(s) ds, computed spectrally.
inline GridFunction circular_convolution(const GridFunction& w, const GridFunction& y) {
  w.require_same_grid(y);
  return CircularConvolver(w).apply(y);
}

/// Orthonormal Fourier basis in channel order [phi_0, cos 1, sin 1, ..., cos K, sin K].
inline std::vector<GridFunction> fourier_basis(CircleGrid grid, std::size_t K) {
  if (4 * K >= grid.size()) {
    throw ResolutionError("fourier_basis: K = " + std::to_string(K) + " not resolvable on n = " +
                          std::to_string(grid.size()));
  }
  const double c0 = 1.0 / std::sqrt(two_pi);
  const double ck = 1.0 / std::sqrt(std::numbers::pi);
  std::vector<GridFunction> basis;
  basis.reserve(2 * K + 1);
  basis.push_back(GridFunction::constant(grid, c0));
  for (std::size_t k = 1; k <= K; ++k) {
    const auto kd = static_cast<double>(k);
    basis.push_back(GridFunction::sample(grid, [&](double th) { return ck * std::cos(kd * th); }));
    basis.push_back(GridFunction::sample(grid, [&](double th) { return ck * std::sin(kd * th); }));
  }
  return basis;
}

}  // namespace banach_oc
