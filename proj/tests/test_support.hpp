#pragma once

// Test-only systems, generators and oracles.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "banach_oc/banach_oc.hpp"

namespace banach_oc::testing {

/// x' = -x + u, l(x) = x^2 / 2.
struct DecaySystem {
  using State = double;
  double alpha = 1.0;

  State drift(double, State x) const { return -x; }
  State drift_jacobian_adjoint(double, State, State p) const { return -p; }
  State control_apply(double, State, const ControlVector& u) const { return u[0]; }
  ControlVector control_adjoint(double, State, State p) const { return {p}; }
  std::vector<Channel<State>> channels(double, State) const { return {{{1.0}, 1.0}}; }
  double terminal_cost(State x) const { return 0.5 * x * x; }
  State terminal_cost_gradient(State x) const { return x; }
  double inner(State a, State b) const { return a * b; }
  std::size_t control_dim() const { return 1; }
  double control_bound() const { return 1e3; }
  double energy_weight() const { return alpha; }
};

/// x' = x^2 + u: blows up in finite time from x0 = 1.
struct BlowupSystem : DecaySystem {
  State drift(double, State x) const { return x * x; }
  State drift_jacobian_adjoint(double, State x, State p) const { return 2.0 * x * p; }
};

/// x' = u with a constant terminal cost.
struct FlatCostSystem : DecaySystem {
  State drift(double, State) const { return 0.0; }
  State drift_jacobian_adjoint(double, State, State) const { return 0.0; }
  double terminal_cost(State) const { return 2.0; }
  State terminal_cost_gradient(State) const { return 0.0; }
};

static_assert(ControlAffineSystem<DecaySystem>);
static_assert(ControlAffineSystem<BlowupSystem>);
static_assert(ControlAffineSystem<FlatCostSystem>);

inline GridFunction random_field(std::mt19937_64& rng, CircleGrid grid, std::size_t modes = 6, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> a(2 * modes + 1);
  for (double& v : a) v = nd(rng);
  return GridFunction::sample(grid, [&](double th) {
    double s = a[0];
    for (std::size_t k = 1; k <= modes; ++k) {
      const double kd = static_cast<double>(k);
      s += (a[2 * k - 1] * std::cos(kd * th) + a[2 * k] * std::sin(kd * th)) / kd;
    }
    return s;
  });
}

inline ControlVector random_vector(std::mt19937_64& rng, std::size_t m, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  ControlVector u(m);
  for (double& v : u) v = nd(rng);
  return u;
}

/// Smooth random control: per channel a + b sin(2 pi t/T) + c cos(3 pi t/T).
inline ControlTrajectory random_control(std::mt19937_64& rng, TimeGrid grid, std::size_t m, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<ControlVector> v(grid.steps(), ControlVector(m));
  for (std::size_t j = 0; j < m; ++j) {
    const double a = nd(rng), b = nd(rng), c = nd(rng);
    for (std::size_t i = 0; i < grid.steps(); ++i) {
      const double s = grid.time(i) / grid.horizon();
      v[i][j] = a + b * std::sin(2.0 * std::numbers::pi * s) + c * std::cos(3.0 * std::numbers::pi * s);
    }
  }
  return ControlTrajectory(grid, std::move(v));
}

/// O(n^2) rectangle-rule convolution integral.
inline std::vector<double> direct_convolution(const GridFunction& w, const GridFunction& y) {
  const std::size_t n = w.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += w[(j + n - l) % n] * y[l];
    out[j] = s * w.grid().spacing();
  }
  return out;
}

/// Power series sum_k (x/2)^{2k+nu} / (k! (k+nu)!) for I_nu, nu in {0, 1}.
inline double bessel_series(int nu, double x) {
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= 0.25 * x * x / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
  }
  return sum;
}

inline ControlTrajectory perturbed(const ControlTrajectory& u, double s, const ControlTrajectory& du) {
  ControlTrajectory out = u;
  for (std::size_t i = 0; i < u.steps(); ++i) out[i] = axpy(u[i], s, du[i]);
  return out;
}

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

}  // namespace banach_oc::testing
