#pragma once

// Cost functional I[u] = l(x_T) + (alpha/2) int |u|^2, the Hamilton-Pontryagin function,
// the exact increment formula and its pointwise minimizer.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "banach_oc/control.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/system.hpp"

namespace banach_oc {

struct CostBreakdown {
  double terminal = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

/// (alpha/2) sum_i |u_i|^2 dt, exact for the piecewise-constant control class.
inline double control_energy(const ControlTrajectory& u, double alpha) {
  double sum = 0.0;
  for (const auto& v : u.values()) sum += dot(v, v);
  return 0.5 * alpha * sum * u.grid().dt();
}

template <ControlAffineSystem Sys>
CostBreakdown total_cost(const Sys& sys, const StatePath<typename Sys::State>& x, const ControlTrajectory& u) {
  require_same_grid(x.grid(), u.grid());
  if (x.last_step() != u.steps()) throw DimensionError("total_cost: state path does not reach T");
  CostBreakdown c;
  c.terminal = sys.terminal_cost(x.back());
  c.energy = control_energy(u, sys.energy_weight());
  c.total = c.terminal + c.energy;
  return c;
}

/// Integrates u from x0 and evaluates its cost.
template <ControlAffineSystem Sys>
CostBreakdown evaluate_cost(const Sys& sys, const typename Sys::State& x0, const ControlTrajectory& u) {
  return total_cost(sys, integrate_forward(sys, x0, u), u);
}

/// H_t(x, p, u) = (alpha/2)|u|^2 + <p, f_t(x)> + <u, G_t(x)'p>
template <ControlAffineSystem Sys>
double hamiltonian(const Sys& sys, double t, const typename Sys::State& x, const typename Sys::State& p,
                   const ControlVector& u) {
  return 0.5 * sys.energy_weight() * dot(u, u) + sys.inner(p, sys.drift(t, x)) + dot(u, sys.control_adjoint(t, x, p));
}

/// Minimizer over the ball B_R of u -> (alpha/2)|u|^2 + <u, gp>.
/// For alpha = 0 and gp = 0 every point minimizes; the zero control is returned.
inline ControlVector feedback_minimizer(std::span<const double> gp, double alpha, double radius) {
  if (alpha > 0.0) return project_ball(scaled(-1.0 / alpha, gp), radius);
  const double r = norm(gp);
  if (r == 0.0) return ControlVector(gp.size(), 0.0);
  return scaled(-radius / r, gp);
}

template <ControlAffineSystem Sys>
ControlVector feedback_minimizer(const Sys& sys, std::span<const double> gp) {
  return feedback_minimizer(gp, sys.energy_weight(), sys.control_bound());
}

/// G(x_i)'psi_i averaged over the endpoints of each step.
template <ControlAffineSystem Sys>
std::vector<ControlVector> adjoint_control_coupling(const Sys& sys, const StatePath<typename Sys::State>& x,
                                                    const AdjointPath<typename Sys::State>& psi) {
  const TimeGrid& grid = x.grid();
  std::vector<ControlVector> out(grid.steps());
  ControlVector left = sys.control_adjoint(grid.time(0), x.at(0), psi.at(0));
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    ControlVector right = sys.control_adjoint(grid.time(i + 1), x.at(i + 1), psi.at(i + 1));
    out[i] = scaled(0.5, axpy(left, 1.0, right));
    left = std::move(right);
  }
  return out;
}

/// Per-step gradient density alpha u_i + G'psi; the derivative of I along du is
/// sum_i dt <du_i, density_i>.
template <ControlAffineSystem Sys>
ControlTrajectory cost_gradient(const Sys& sys, const StatePath<typename Sys::State>& x,
                                const AdjointPath<typename Sys::State>& psi, const ControlTrajectory& u) {
  std::vector<ControlVector> coupling = adjoint_control_coupling(sys, x, psi);
  for (std::size_t i = 0; i < coupling.size(); ++i) coupling[i] = axpy(coupling[i], sys.energy_weight(), u[i]);
  return ControlTrajectory(u.grid(), std::move(coupling));
}

/// sum_i dt <a_i, b_i>
inline double time_inner(const ControlTrajectory& a, const ControlTrajectory& b) {
  require_same_grid(a.grid(), b.grid());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.steps(); ++i) sum += dot(a[i], b[i]);
  return sum * a.grid().dt();
}

/// Supplies G(x)' Dp_t(x) at node i and state x, for the baseline value function p_t.
template <typename State>
using CouplingProbe = std::function<ControlVector(std::size_t node, const State& x)>;

/// Right-hand side of the exact increment formula,
///   int (Hbar_t(x_t, u_t) - Hbar_t(x_t, ubar_t)) dt,  Hbar_t(x, v) = (alpha/2)|v|^2 + <v, G(x)'Dp_t(x)>,
/// along the trajectory x of u, by the trapezoid rule over each step (the control is
/// constant on a step, the coupling is probed at both end nodes). Steps where u and
/// ubar coincide contribute exactly zero and are not probed.
template <ControlAffineSystem Sys>
double increment(const Sys& sys, const typename Sys::State& x0, const ControlTrajectory& ubar,
                 const ControlTrajectory& u, const CouplingProbe<typename Sys::State>& probe) {
  require_same_grid(u.grid(), ubar.grid());
  const StatePath<typename Sys::State> x = integrate_forward(sys, x0, u);
  const double alpha = sys.energy_weight();
  std::vector<std::optional<ControlVector>> coupling(u.steps() + 1);
  auto at_node = [&](std::size_t i) -> const ControlVector& {
    if (!coupling[i]) coupling[i] = probe(i, x.at(i));
    return *coupling[i];
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < u.steps(); ++i) {
    if (u[i] == ubar[i]) continue;
    const ControlVector du = axpy(u[i], -1.0, ubar[i]);
    const double linear = 0.5 * (dot(du, at_node(i)) + dot(du, at_node(i + 1)));
    sum += 0.5 * alpha * (dot(u[i], u[i]) - dot(ubar[i], ubar[i])) + linear;
  }
  return sum * u.grid().dt();
}

}  // namespace banach_oc
