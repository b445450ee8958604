#pragma once

// Amari neural field on the circle,
//   dN/dt = -gamma N + W * sigma(N) + sum_j u_j phi_j,
// with a von Mises synaptic kernel, logistic firing rate and a truncated
// orthonormal Fourier actuation basis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "banach_oc/errors.hpp"
#include "banach_oc/spectral.hpp"
#include "banach_oc/system.hpp"

namespace banach_oc {

/// Modified Bessel function I_0 by its power series sum_k (kappa/2)^{2k} / (k!)^2.
inline double bessel_i0(double kappa) {
  if (!(kappa >= 0.0)) throw DomainError("bessel_i0: kappa must be >= 0");
  const double q = 0.25 * kappa * kappa;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

/// W(theta) = exp(kappa cos theta) / (2 pi I_0(kappa)), unit mass on the circle.
inline GridFunction vonmises_kernel(double kappa, CircleGrid grid) {
  const double norm = two_pi * bessel_i0(kappa);
  return GridFunction::sample(grid, [&](double th) { return std::exp(kappa * std::cos(th)) / norm; });
}

namespace detail {
inline double clamped_exponent(double q, double beta, double vartheta) {
  return std::clamp(-beta * (q - vartheta), -500.0, 500.0);
}
}  // namespace detail

/// Logistic rate 1 / (1 + exp(-beta (q - vartheta))).
inline double sigma(double q, double beta, double vartheta) {
  return 1.0 / (1.0 + std::exp(detail::clamped_exponent(q, beta, vartheta)));
}

inline double sigma_prime(double q, double beta, double vartheta) {
  const double s = sigma(q, beta, vartheta);
  return beta * s * (1.0 - s);
}

struct AmariParams {
  double gamma = 1.0;
  double beta = 2.0;
  double vartheta = 0.5;
  double kappa = 4.0;
  std::size_t K = 3;
  double A_d = 0.8;
  double kappa_d = 6.0;
  double theta_star = std::numbers::pi / 3.0;
  double alpha = 0.1;
  double R = 1e3;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("AmariParams: ") + what);
    };
    require(gamma > 0.0, "gamma must be > 0");
    require(beta > 0.0, "beta must be > 0");
    require(std::isfinite(vartheta), "vartheta must be finite");
    require(kappa > 0.0, "kappa must be > 0");
    require(kappa_d > 0.0, "kappa_d must be > 0");
    require(A_d > 0.0, "A_d must be > 0");
    require(R > 0.0, "R must be > 0");
    require(alpha >= 0.0, "alpha must be >= 0");
  }
};

/// N_des(theta) = A_d exp(kappa_d cos(theta - theta*)) / (2 pi I_0(kappa_d)).
inline GridFunction target_profile(const AmariParams& params, CircleGrid grid) {
  const double norm = two_pi * bessel_i0(params.kappa_d);
  return GridFunction::sample(grid, [&](double th) {
    return params.A_d * std::exp(params.kappa_d * std::cos(th - params.theta_star)) / norm;
  });
}

/// -gamma x + W * sigma(x), where W is given by its cached convolver.
inline GridFunction amari_drift(const GridFunction& x, const AmariParams& params, const CircularConvolver& kernel) {
  GridFunction rate = x.map([&](double q) { return sigma(q, params.beta, params.vartheta); });
  return kernel.apply(rate).add_scaled(-params.gamma, x);
}

inline GridFunction amari_drift(const GridFunction& x, const AmariParams& params, const GridFunction& W) {
  x.require_same_grid(W);
  return amari_drift(x, params, CircularConvolver(W));
}

/// Df(x)' p = -gamma p + sigma'(x) (W * p); W is even, so convolution is self-adjoint.
inline GridFunction amari_drift_jacobian_adjoint(const GridFunction& x, const GridFunction& p,
                                                 const AmariParams& params, const CircularConvolver& kernel) {
  x.require_same_grid(p);
  GridFunction slope = x.map([&](double q) { return sigma_prime(q, params.beta, params.vartheta); });
  return (slope * kernel.apply(p)).add_scaled(-params.gamma, p);
}

inline GridFunction amari_drift_jacobian_adjoint(const GridFunction& x, const GridFunction& p,
                                                 const AmariParams& params, const GridFunction& W) {
  x.require_same_grid(W);
  return amari_drift_jacobian_adjoint(x, p, params, CircularConvolver(W));
}

/// 1/2 * integral (x - N_des)^2.
inline double amari_terminal_cost(const GridFunction& x, const GridFunction& target) {
  const GridFunction e = x - target;
  return 0.5 * l2_inner(e, e);
}

inline double amari_terminal_cost(const GridFunction& x, const AmariParams& params) {
  return amari_terminal_cost(x, target_profile(params, x.grid()));
}

inline GridFunction amari_terminal_cost_gradient(const GridFunction& x, const GridFunction& target) {
  return x - target;
}

inline GridFunction amari_terminal_cost_gradient(const GridFunction& x, const AmariParams& params) {
  return x - target_profile(params, x.grid());
}

/// The Amari field as a control-affine system on C(S^1) sampled on a grid.
/// G is the constant synthesis map u -> sum_j u_j phi_j.
class AmariSystem {
 public:
  using State = GridFunction;

  AmariSystem(AmariParams params, CircleGrid grid)
      : params_((params.validate(), params)),
        grid_(grid),
        kernel_(vonmises_kernel(params_.kappa, grid)),
        convolver_(kernel_),
        basis_(fourier_basis(grid, params_.K)),
        target_(target_profile(params_, grid)) {}

  const AmariParams& params() const noexcept { return params_; }
  const CircleGrid& grid() const noexcept { return grid_; }
  const GridFunction& kernel() const noexcept { return kernel_; }
  const GridFunction& target() const noexcept { return target_; }
  const std::vector<GridFunction>& basis() const noexcept { return basis_; }

  /// Test hook: with the drift disabled the state only moves under the control.
  void set_drift_enabled(bool enabled) noexcept { drift_enabled_ = enabled; }
  bool drift_enabled() const noexcept { return drift_enabled_; }

  State zero_state() const { return GridFunction::constant(grid_, 0.0); }

  State drift(double /*t*/, const State& x) const {
    if (!drift_enabled_) return GridFunction::constant(grid_, 0.0);
    return amari_drift(x, params_, convolver_);
  }

  /// Df(x)[v] = -gamma v + W * (sigma'(x) v).
  State drift_jacobian(double /*t*/, const State& x, const State& v) const {
    if (!drift_enabled_) return GridFunction::constant(grid_, 0.0);
    GridFunction slope = x.map([&](double q) { return sigma_prime(q, params_.beta, params_.vartheta); });
    return convolver_.apply(slope * v).add_scaled(-params_.gamma, v);
  }

  State drift_jacobian_adjoint(double /*t*/, const State& x, const State& p) const {
    if (!drift_enabled_) return GridFunction::constant(grid_, 0.0);
    return amari_drift_jacobian_adjoint(x, p, params_, convolver_);
  }

  State control_apply(double /*t*/, const State& x, const ControlVector& u) const {
    check_control(u);
    GridFunction out = GridFunction::constant(x.grid(), 0.0);
    for (std::size_t j = 0; j < u.size(); ++j) out.add_scaled(u[j], basis_[j]);
    return out;
  }

  ControlVector control_adjoint(double /*t*/, const State& /*x*/, const State& p) const {
    ControlVector out(basis_.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = l2_inner(p, basis_[j]);
    return out;
  }

  std::vector<Channel<State>> channels(double /*t*/, const State& /*x*/) const {
    std::vector<Channel<State>> out;
    out.reserve(basis_.size());
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      ControlVector e(basis_.size(), 0.0);
      e[j] = 1.0;
      out.push_back({std::move(e), basis_[j]});
    }
    return out;
  }

  double terminal_cost(const State& x) const { return amari_terminal_cost(x, target_); }
  State terminal_cost_gradient(const State& x) const { return amari_terminal_cost_gradient(x, target_); }
  double inner(const State& a, const State& b) const { return l2_inner(a, b); }

  std::size_t control_dim() const noexcept { return basis_.size(); }
  double control_bound() const noexcept { return params_.R; }
  double energy_weight() const noexcept { return params_.alpha; }

 private:
  void check_control(const ControlVector& u) const {
    if (u.size() != basis_.size()) {
      throw DimensionError("AmariSystem: control of dimension " + std::to_string(u.size()) + ", expected " +
                           std::to_string(basis_.size()));
    }
  }

  AmariParams params_;
  CircleGrid grid_;
  GridFunction kernel_;
  CircularConvolver convolver_;
  std::vector<GridFunction> basis_;
  GridFunction target_;
  bool drift_enabled_ = true;
};

static_assert(ControlAffineSystem<AmariSystem>);

}  // namespace banach_oc
