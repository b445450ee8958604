#pragma once

// Contract for control-affine dynamics  x' = f_t(x) + G_t(x) u  with a finite channel
// structure  G_t(x) u = sum_j <u, g^j(x)> h^j(x), terminal cost l(x) and energy weight alpha.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <vector>

#include "banach_oc/control.hpp"

namespace banach_oc {

inline bool is_finite(double x) { return std::isfinite(x); }

/// One actuation channel: scalar gain direction g in U and spatial direction h in X.
template <typename State>
struct Channel {
  ControlVector gain;
  State direction;
};

template <typename S>
concept StateSpace = std::copyable<S> && requires(const S& a, const S& b, double s) {
  { a + b } -> std::convertible_to<S>;
  { a - b } -> std::convertible_to<S>;
  { s * a } -> std::convertible_to<S>;
  { is_finite(a) } -> std::convertible_to<bool>;
};

template <typename Sys>
concept ControlAffineSystem =
    StateSpace<typename Sys::State> &&
    requires(const Sys& sys, double t, const typename Sys::State& x, const typename Sys::State& p,
             const ControlVector& u) {
      { sys.drift(t, x) } -> std::convertible_to<typename Sys::State>;
      { sys.control_apply(t, x, u) } -> std::convertible_to<typename Sys::State>;
      { sys.control_adjoint(t, x, p) } -> std::convertible_to<ControlVector>;
      { sys.channels(t, x) } -> std::convertible_to<std::vector<Channel<typename Sys::State>>>;
      { sys.drift_jacobian_adjoint(t, x, p) } -> std::convertible_to<typename Sys::State>;
      { sys.terminal_cost(x) } -> std::convertible_to<double>;
      { sys.terminal_cost_gradient(x) } -> std::convertible_to<typename Sys::State>;
      { sys.inner(x, p) } -> std::convertible_to<double>;
      { sys.control_dim() } -> std::convertible_to<std::size_t>;
      { sys.control_bound() } -> std::convertible_to<double>;
      { sys.energy_weight() } -> std::convertible_to<double>;
    };

/// Systems whose control operator depends on the state expose (D_x G_t(x) u)' p.
template <typename Sys>
concept HasControlJacobianAdjoint =
    requires(const Sys& sys, double t, const typename Sys::State& x, const typename Sys::State& p,
             const ControlVector& u) {
      { sys.control_jacobian_adjoint(t, x, u, p) } -> std::convertible_to<typename Sys::State>;
    };

/// DF_t(x, u)' p = Df_t(x)' p + (DG_t(x) u)' p, the second term only when the system has one.
template <ControlAffineSystem Sys>
typename Sys::State vector_field_jacobian_adjoint(const Sys& sys, double t, const typename Sys::State& x,
                                                  const ControlVector& u, const typename Sys::State& p) {
  if constexpr (HasControlJacobianAdjoint<Sys>) {
    return sys.drift_jacobian_adjoint(t, x, p) + sys.control_jacobian_adjoint(t, x, u, p);
  } else {
    return sys.drift_jacobian_adjoint(t, x, p);
  }
}

/// f_t(x) + G_t(x) u
template <ControlAffineSystem Sys>
typename Sys::State vector_field(const Sys& sys, double t, const typename Sys::State& x, const ControlVector& u) {
  return sys.drift(t, x) + sys.control_apply(t, x, u);
}

}  // namespace banach_oc
