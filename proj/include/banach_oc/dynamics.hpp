#pragma once

// Fixed-step RK4 flows of x' = f(x) + G(x) u under piecewise-constant controls,
// backward integration of the adjoint equation, and control concatenation.

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "banach_oc/control.hpp"
#include "banach_oc/errors.hpp"
#include "banach_oc/system.hpp"

namespace banach_oc {

/// Uniform nodes t_i = i T / steps, i = 0..steps.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (steps == 0) throw ConfigError("TimeGrid: steps must be >= 1");
    if (!(horizon > 0.0)) throw ConfigError("TimeGrid: horizon must be > 0");
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t i) const noexcept {
    return i == steps_ ? horizon_ : horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

/// One control vector per step, held constant on [t_i, t_{i+1}).
class ControlTrajectory {
 public:
  ControlTrajectory(TimeGrid grid, std::vector<ControlVector> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.steps()) {
      throw DimensionError("ControlTrajectory: " + std::to_string(values_.size()) + " values for " +
                           std::to_string(grid_.steps()) + " steps");
    }
    for (const auto& v : values_) require_same_dim(v, values_.front());
  }

  static ControlTrajectory constant(TimeGrid grid, ControlVector value) {
    return ControlTrajectory(grid, std::vector<ControlVector>(grid.steps(), std::move(value)));
  }
  static ControlTrajectory zeros(TimeGrid grid, std::size_t dim) { return constant(grid, ControlVector(dim, 0.0)); }

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t steps() const noexcept { return values_.size(); }
  std::size_t dim() const noexcept { return values_.front().size(); }
  const ControlVector& operator[](std::size_t i) const { return values_[i]; }
  ControlVector& operator[](std::size_t i) { return values_[i]; }
  const std::vector<ControlVector>& values() const noexcept { return values_; }

  friend bool operator==(const ControlTrajectory&, const ControlTrajectory&) = default;

 private:
  TimeGrid grid_;
  std::vector<ControlVector> values_;
};

inline bool is_admissible(const ControlTrajectory& u, double radius) {
  return std::all_of(u.values().begin(), u.values().end(), [&](const ControlVector& v) { return norm(v) <= radius; });
}

/// Pointwise-in-time projection onto the ball of radius R.
inline ControlTrajectory project_ball(ControlTrajectory u, double radius) {
  for (std::size_t i = 0; i < u.steps(); ++i) u[i] = project_ball(std::move(u[i]), radius);
  return u;
}

/// max_i |u_i - v_i|_2
inline double sup_distance(const ControlTrajectory& u, const ControlTrajectory& v) {
  double d = 0.0;
  for (std::size_t i = 0; i < u.steps(); ++i) d = std::max(d, norm(axpy(u[i], -1.0, v[i])));
  return d;
}

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (!(a == b)) throw DimensionError("time grid mismatch");
}

/// States at consecutive nodes first..first + size - 1 of a time grid.
template <typename State>
class NodePath {
 public:
  NodePath(TimeGrid grid, std::size_t first, std::vector<State> states)
      : grid_(grid), first_(first), states_(std::move(states)) {}

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t first_step() const noexcept { return first_; }
  std::size_t last_step() const noexcept { return first_ + states_.size() - 1; }
  std::size_t size() const noexcept { return states_.size(); }

  /// State at absolute node index i.
  const State& at(std::size_t i) const {
    if (i < first_ || i > last_step()) throw DimensionError("node " + std::to_string(i) + " outside path");
    return states_[i - first_];
  }
  const State& front() const { return states_.front(); }
  const State& back() const { return states_.back(); }
  const std::vector<State>& states() const noexcept { return states_; }

  bool covers_horizon() const noexcept { return first_ == 0 && last_step() == grid_.steps(); }

  friend bool operator==(const NodePath&, const NodePath&) = default;

 private:
  TimeGrid grid_;
  std::size_t first_;
  std::vector<State> states_;
};

template <typename State>
using StatePath = NodePath<State>;
template <typename State>
using AdjointPath = NodePath<State>;

/// One classical RK4 step with the control frozen.
template <ControlAffineSystem Sys>
typename Sys::State rk4_step(const Sys& sys, double t, const typename Sys::State& x, const ControlVector& u,
                             double dt) {
  using State = typename Sys::State;
  const double half = 0.5 * dt;
  const State k1 = vector_field(sys, t, x, u);
  const State k2 = vector_field(sys, t + half, x + half * k1, u);
  const State k3 = vector_field(sys, t + half, x + half * k2, u);
  const State k4 = vector_field(sys, t + dt, x + dt * k3, u);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {
inline void check_step_range(const ControlTrajectory& u, std::size_t from, std::size_t to) {
  if (from > to || to > u.steps()) {
    throw DimensionError("step range [" + std::to_string(from) + ", " + std::to_string(to) + "] outside grid of " +
                         std::to_string(u.steps()) + " steps");
  }
}
}  // namespace detail

/// Flow map: the state at node `to` starting from x_init at node `from`.
template <ControlAffineSystem Sys>
typename Sys::State flow(const Sys& sys, typename Sys::State x, const ControlTrajectory& u, std::size_t from,
                         std::size_t to) {
  detail::check_step_range(u, from, to);
  const TimeGrid& grid = u.grid();
  const double dt = grid.dt();
  for (std::size_t i = from; i < to; ++i) {
    x = rk4_step(sys, grid.time(i), x, u[i], dt);
    if (!is_finite(x)) throw DivergenceError(i + 1);
  }
  return x;
}

/// States at all nodes from..to under u, starting from x_init at node `from`.
template <ControlAffineSystem Sys>
StatePath<typename Sys::State> integrate_forward(const Sys& sys, const typename Sys::State& x_init,
                                                 const ControlTrajectory& u, std::size_t from, std::size_t to) {
  detail::check_step_range(u, from, to);
  if (!is_finite(x_init)) throw DivergenceError(from);
  const TimeGrid& grid = u.grid();
  const double dt = grid.dt();
  std::vector<typename Sys::State> states;
  states.reserve(to - from + 1);
  states.push_back(x_init);
  for (std::size_t i = from; i < to; ++i) {
    states.push_back(rk4_step(sys, grid.time(i), states.back(), u[i], dt));
    if (!is_finite(states.back())) throw DivergenceError(i + 1);
  }
  return StatePath<typename Sys::State>(grid, from, std::move(states));
}

template <ControlAffineSystem Sys>
StatePath<typename Sys::State> integrate_forward(const Sys& sys, const typename Sys::State& x_init,
                                                 const ControlTrajectory& u) {
  return integrate_forward(sys, x_init, u, 0, u.steps());
}

/// psi' = -DF(xbar, ubar)' psi backward from psi_T = Dl(xbar_T). Substep states are
/// linear interpolants of the stored nodes.
template <ControlAffineSystem Sys>
AdjointPath<typename Sys::State> integrate_adjoint(const Sys& sys, const StatePath<typename Sys::State>& xbar,
                                                   const ControlTrajectory& ubar) {
  using State = typename Sys::State;
  require_same_grid(xbar.grid(), ubar.grid());
  if (!xbar.covers_horizon()) throw DimensionError("integrate_adjoint: state path must cover [0, T]");
  const TimeGrid& grid = ubar.grid();
  const std::size_t steps = grid.steps();
  const double h = grid.dt();

  std::vector<State> psi(steps + 1, xbar.back());
  psi[steps] = sys.terminal_cost_gradient(xbar.back());
  if (!is_finite(psi[steps])) throw DivergenceError(steps);

  for (std::size_t i = steps; i-- > 0;) {
    const ControlVector& u = ubar[i];
    const double t1 = grid.time(i + 1);
    const double tm = t1 - 0.5 * h;
    const State& x1 = xbar.at(i + 1);
    const State& x0 = xbar.at(i);
    const State xm = 0.5 * (x0 + x1);
    // dpsi/dt = -DF'psi; stepping backwards in time
    const State& p = psi[i + 1];
    const State k1 = vector_field_jacobian_adjoint(sys, t1, x1, u, p);
    const State k2 = vector_field_jacobian_adjoint(sys, tm, xm, u, p + (0.5 * h) * k1);
    const State k3 = vector_field_jacobian_adjoint(sys, tm, xm, u, p + (0.5 * h) * k2);
    const State k4 = vector_field_jacobian_adjoint(sys, grid.time(i), x0, u, p + h * k3);
    psi[i] = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!is_finite(psi[i])) throw DivergenceError(i);
  }
  return AdjointPath<State>(grid, 0, std::move(psi));
}

/// u before node s, ubar from node s on.
inline ControlTrajectory concat_controls(const ControlTrajectory& u, const ControlTrajectory& ubar, std::size_t s) {
  require_same_grid(u.grid(), ubar.grid());
  if (s > u.steps()) throw DimensionError("concat_controls: node " + std::to_string(s) + " out of range");
  std::vector<ControlVector> values(ubar.values());
  std::copy(u.values().begin(), u.values().begin() + static_cast<std::ptrdiff_t>(s), values.begin());
  return ControlTrajectory(u.grid(), std::move(values));
}

}  // namespace banach_oc
