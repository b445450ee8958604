#pragma once

// Scalar validation instance: x' = u, x(0) = 0, l(x) = (x - target)^2 / 2.
// The optimal control is constant, c* = target / (T + alpha), with cost
// target^2 alpha / (2 (T + alpha)).

#include <cstddef>
#include <string>
#include <vector>

#include "banach_oc/errors.hpp"
#include "banach_oc/system.hpp"

namespace banach_oc {

struct LqToyParams {
  double alpha = 1.0;
  double target = 1.0;
  double horizon = 1.0;
  double R = 1e3;

  void validate() const {
    if (!(alpha > 0.0)) throw ConfigError("LqToyParams: alpha must be > 0");
    if (!(horizon > 0.0)) throw ConfigError("LqToyParams: horizon must be > 0");
    if (!(R > 0.0)) throw ConfigError("LqToyParams: R must be > 0");
  }

  double optimal_control() const { return target / (horizon + alpha); }
  double optimal_cost() const { return 0.5 * target * target * alpha / (horizon + alpha); }
};

class LqToySystem {
 public:
  using State = double;

  explicit LqToySystem(LqToyParams params) : params_((params.validate(), params)) {}

  const LqToyParams& params() const noexcept { return params_; }
  State zero_state() const noexcept { return 0.0; }

  State drift(double, State) const noexcept { return 0.0; }
  State drift_jacobian(double, State, State) const noexcept { return 0.0; }
  State drift_jacobian_adjoint(double, State, State) const noexcept { return 0.0; }

  State control_apply(double, State, const ControlVector& u) const {
    check_control(u);
    return u[0];
  }
  ControlVector control_adjoint(double, State, State p) const { return {p}; }
  std::vector<Channel<State>> channels(double, State) const { return {{{1.0}, 1.0}}; }

  double terminal_cost(State x) const noexcept {
    const double e = x - params_.target;
    return 0.5 * e * e;
  }
  State terminal_cost_gradient(State x) const noexcept { return x - params_.target; }
  double inner(State a, State b) const noexcept { return a * b; }

  std::size_t control_dim() const noexcept { return 1; }
  double control_bound() const noexcept { return params_.R; }
  double energy_weight() const noexcept { return params_.alpha; }

 private:
  void check_control(const ControlVector& u) const {
    if (u.size() != 1) throw DimensionError("LqToySystem: control dimension " + std::to_string(u.size()) + ", expected 1");
  }

  LqToyParams params_;
};

static_assert(ControlAffineSystem<LqToySystem>);

inline LqToySystem lq_toy_system(const LqToyParams& params) { return LqToySystem(params); }

}  // namespace banach_oc
