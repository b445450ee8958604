#pragma once

// Quick invariant checks runnable from the command line (`banach_oc selftest`).

#include <cmath>
#include <cstddef>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "banach_oc/amari.hpp"
#include "banach_oc/cost.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/lq_toy.hpp"
#include "banach_oc/spectral.hpp"

namespace banach_oc {

namespace detail {

inline ControlVector random_control(std::mt19937_64& rng, std::size_t m, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  ControlVector u(m);
  for (double& v : u) v = nd(rng);
  return u;
}

inline GridFunction random_field(std::mt19937_64& rng, CircleGrid grid, std::size_t modes, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> a(2 * modes + 1);
  for (double& v : a) v = nd(rng);
  return GridFunction::sample(grid, [&](double th) {
    double s = a[0];
    for (std::size_t k = 1; k <= modes; ++k) {
      s += (a[2 * k - 1] * std::cos(static_cast<double>(k) * th) + a[2 * k] * std::sin(static_cast<double>(k) * th)) /
           static_cast<double>(k);
    }
    return s;
  });
}

}  // namespace detail

/// Runs the checks, printing one PASS/FAIL line each. Returns true when all pass.
inline bool run_selftest(unsigned long seed, std::ostream& os) {
  std::mt19937_64 rng(seed);
  bool all = true;
  auto report = [&](const std::string& name, bool ok, double value) {
    os << (ok ? "PASS " : "FAIL ") << name << " (" << value << ")\n";
    all = all && ok;
  };

  const CircleGrid grid(128);
  {
    const auto y = GridFunction::sample(grid, [](double th) { return std::cos(th) * std::cos(th); });
    const double err = std::abs(quadrature(y) - std::numbers::pi);
    report("quadrature exact on cos^2", err <= 1e-12, err);
  }
  {
    const auto y = detail::random_field(rng, grid, 20, 1.0);
    const auto back = inverse_dft(grid, dft(y));
    double err = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) err = std::max(err, std::abs(back[j] - y[j]));
    report("DFT round trip", err <= 1e-12, err);
  }
  {
    const AmariSystem sys(AmariParams{}, grid);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = detail::random_field(rng, grid, 6, 1.0);
      const auto p = detail::random_field(rng, grid, 6, 1.0);
      const auto u = detail::random_control(rng, sys.control_dim(), 1.0);
      const double lhs = sys.inner(p, sys.control_apply(0.0, x, u));
      const double rhs = dot(u, sys.control_adjoint(0.0, x, p));
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    report("Amari adjoint pairing <p, Gu> = <u, G'p>", worst <= 1e-8, worst);
  }
  {
    const AmariSystem sys(AmariParams{}, grid);
    const TimeGrid tg(3.0, 60);
    std::vector<ControlVector> values(tg.steps());
    for (auto& v : values) v = detail::random_control(rng, sys.control_dim(), 0.5);
    const ControlTrajectory u(tg, values);
    const auto direct = flow(sys, sys.zero_state(), u, 0, 60);
    const auto split = flow(sys, flow(sys, sys.zero_state(), u, 0, 23), u, 23, 60);
    report("flow composition bit-identical", direct == split, 0.0);
  }
  {
    const LqToySystem sys(LqToyParams{});
    const TimeGrid tg(1.0, 50);
    const auto u = ControlTrajectory::constant(tg, {0.3});
    const auto x = integrate_forward(sys, 0.0, u);
    const auto psi = integrate_adjoint(sys, x, u);
    const double expected = x.back() - sys.params().target;
    double err = 0.0;
    for (double p : psi.states()) err = std::max(err, std::abs(p - expected));
    report("LQ adjoint constant", err <= 1e-14, err);
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto gp = detail::random_control(rng, 7, 5.0);
      worst = std::max(worst, norm(feedback_minimizer(gp, 0.1, 1.0)) - 1.0);
    }
    report("feedback minimizer stays in ball", worst <= 1e-12, worst);
  }
  return all;
}

}  // namespace banach_oc
