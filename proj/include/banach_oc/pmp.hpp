#pragma once

// PMP-based descent: forward solve, backward adjoint, then a convex combination of the
// baseline with the pointwise Hamiltonian minimizer, with the tradeoff eta chosen by
// backtracking on the exact cost.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "banach_oc/cost.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/errors.hpp"
#include "banach_oc/report.hpp"
#include "banach_oc/system.hpp"

namespace banach_oc {

struct PmpConfig {
  std::size_t max_iters = 40;
  double eta0 = 0.5;
  double backtrack_factor = 0.5;
  double eta_min = 1e-6;
  double tol_rel = 1e-8;

  void validate() const {
    if (!(eta0 > 0.0 && eta0 < 1.0)) throw ConfigError("PmpConfig: eta0 must lie in (0, 1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
      throw ConfigError("PmpConfig: backtrack_factor must lie in (0, 1)");
    }
    if (!(eta_min > 0.0)) throw ConfigError("PmpConfig: eta_min must be > 0");
    if (!(tol_rel >= 0.0)) throw ConfigError("PmpConfig: tol_rel must be >= 0");
  }
};

namespace detail {
template <ControlAffineSystem Sys>
void require_positive_alpha(const Sys& sys, const char* who) {
  if (!(sys.energy_weight() > 0.0)) {
    throw ConfigError(std::string(who) + ": unsupported configuration, alpha must be > 0");
  }
}

/// Pi_{B_R}(-alpha^{-1} G'psi) per step.
template <ControlAffineSystem Sys>
ControlTrajectory pmp_minimizer(const Sys& sys, const StatePath<typename Sys::State>& x,
                                const AdjointPath<typename Sys::State>& psi) {
  std::vector<ControlVector> coupling = adjoint_control_coupling(sys, x, psi);
  for (auto& c : coupling) c = feedback_minimizer(sys, c);
  return ControlTrajectory(x.grid(), std::move(coupling));
}
}  // namespace detail

/// max_i |u_i - Pi_{B_R}(-alpha^{-1} G(x_i)'psi_i)|, the extremality defect of u.
template <ControlAffineSystem Sys>
double pmp_residual(const Sys& sys, const typename Sys::State& x0, const ControlTrajectory& u) {
  detail::require_positive_alpha(sys, "pmp_residual");
  const auto x = integrate_forward(sys, x0, u);
  const auto psi = integrate_adjoint(sys, x, u);
  return sup_distance(u, detail::pmp_minimizer(sys, x, psi));
}

template <ControlAffineSystem Sys>
DescentReport<typename Sys::State> pmp_descend(const Sys& sys, const typename Sys::State& x0,
                                               const ControlTrajectory& u0, const PmpConfig& cfg = {}) {
  cfg.validate();
  detail::require_positive_alpha(sys, "pmp_descend");
  const double radius = sys.control_bound();

  Stopwatch clock;
  ControlTrajectory ubar = project_ball(u0, radius);
  auto xbar = integrate_forward(sys, x0, ubar);
  CostBreakdown cost = total_cost(sys, xbar, ubar);

  DescentReport<typename Sys::State> report{{}, ubar, xbar, cost};
  report.records.push_back({0, cost, 0.0, 1, clock.elapsed_ms()});

  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    Stopwatch iter_clock;
    const auto psi = integrate_adjoint(sys, xbar, ubar);
    const ControlTrajectory target = detail::pmp_minimizer(sys, xbar, psi);

    std::size_t solves = 0;
    bool accepted = false;
    for (double eta = cfg.eta0; eta >= cfg.eta_min; eta *= cfg.backtrack_factor) {
      std::vector<ControlVector> values(ubar.steps());
      for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = project_ball(axpy(scaled(1.0 - eta, ubar[i]), eta, target[i]), radius);
      }
      ControlTrajectory candidate(ubar.grid(), std::move(values));
      auto x = integrate_forward(sys, x0, candidate);
      ++solves;
      const CostBreakdown c = total_cost(sys, x, candidate);
      if (c.total <= cost.total) {
        const double decrease = cost.total - c.total;
        ubar = std::move(candidate);
        xbar = std::move(x);
        cost = c;
        report.records.push_back({iter, cost, eta, solves, iter_clock.elapsed_ms()});
        accepted = true;
        if (decrease <= cfg.tol_rel * std::abs(report.records[iter - 1].cost.total)) {
          report.stop = StopReason::tolerance;
        }
        break;
      }
    }
    if (!accepted) {
      report.stop = StopReason::no_decrease;
      break;
    }
    if (report.stop == StopReason::tolerance) break;
  }

  report.control = std::move(ubar);
  report.path = std::move(xbar);
  report.cost = cost;
  return report;
}

}  // namespace banach_oc
