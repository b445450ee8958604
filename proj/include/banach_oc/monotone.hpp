#pragma once

// Monotone descent by sample-and-hold feedback synthesis. At each sample node the
// state is frozen, the sensitivity of the baseline terminal cost along every actuation
// channel is probed by a one-sided finite difference of the flow, and the pointwise
// minimizer of the increment integrand is held until the next sample node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "banach_oc/cost.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/errors.hpp"
#include "banach_oc/parallel.hpp"
#include "banach_oc/report.hpp"
#include "banach_oc/system.hpp"

namespace banach_oc {

struct MonotoneConfig {
  std::size_t N = 32;                  // sample subintervals
  std::optional<double> epsilon;       // probe radius; 1/N when unset
  std::size_t max_iters = 5;
  double tol_rel = 1e-8;
  bool smooth_output = false;
  std::size_t smooth_window = 0;       // 0: odd window close to steps/N
  std::size_t probes_per_subinterval = 1;
  std::optional<std::size_t> threads;  // probe workers; BANACH_OC_THREADS when unset

  double probe_radius() const { return epsilon.value_or(1.0 / static_cast<double>(N)); }
  std::size_t worker_count() const { return threads.value_or(probe_thread_cap()); }

  void validate(std::size_t steps) const {
    if (N == 0) throw ConfigError("MonotoneConfig: N must be >= 1");
    if (N > steps) {
      throw ConfigError("MonotoneConfig: N = " + std::to_string(N) + " exceeds the " + std::to_string(steps) +
                        " integration steps");
    }
    if (!(probe_radius() > 0.0)) throw ConfigError("MonotoneConfig: epsilon must be > 0");
    if (probes_per_subinterval == 0) throw ConfigError("MonotoneConfig: probes_per_subinterval must be >= 1");
    if (!(tol_rel >= 0.0)) throw ConfigError("MonotoneConfig: tol_rel must be >= 0");
  }

  std::size_t effective_smooth_window(std::size_t steps) const {
    if (smooth_window != 0) return smooth_window;
    const std::size_t w = std::max<std::size_t>(1, steps / N);
    return w % 2 == 1 ? w : w + 1;
  }
};

/// Sample nodes t_k on the step grid: node k*steps/N for k = 0..N.
inline std::vector<std::size_t> sample_nodes(std::size_t steps, std::size_t N) {
  if (N == 0 || N > steps) throw ConfigError("sample_nodes: need 1 <= N <= steps");
  std::vector<std::size_t> nodes(N + 1);
  for (std::size_t k = 0; k <= N; ++k) nodes[k] = k * steps / N;
  return nodes;
}

struct ProbeResult {
  std::vector<double> xi;         // one finite-difference quotient per channel
  double baseline_terminal = 0.0; // l(Phibar_{t,T}(x))
};

/// xi_j = [l(Phibar_{t,T}(x + eps h^j)) - l(Phibar_{t,T}(x))] / eps at node `node`.
/// The m + 1 flow solves are independent and may run on several workers.
template <ControlAffineSystem Sys>
ProbeResult probe_xi(const Sys& sys, const ControlTrajectory& ubar, std::size_t node,
                     const typename Sys::State& x, double epsilon, std::size_t threads = 1) {
  using State = typename Sys::State;
  if (node > ubar.steps()) throw DimensionError("probe_xi: node out of range");
  const double t = ubar.grid().time(node);
  const std::vector<Channel<State>> channels = sys.channels(t, x);
  std::vector<double> terminal(channels.size() + 1);
  parallel_for(terminal.size(), threads, [&](std::size_t slot) {
    try {
      const State start = slot == 0 ? x : x + epsilon * channels[slot - 1].direction;
      terminal[slot] = sys.terminal_cost(flow(sys, start, ubar, node, ubar.steps()));
    } catch (const DivergenceError& e) {
      if (slot == 0) throw;
      throw e.with_channel(slot - 1);
    }
  });
  ProbeResult r;
  r.baseline_terminal = terminal[0];
  r.xi.resize(channels.size());
  for (std::size_t j = 0; j < channels.size(); ++j) r.xi[j] = (terminal[j + 1] - terminal[0]) / epsilon;
  return r;
}

/// G(x)' Dp_t(x) approximated as sum_j xi_j g^j(x).
template <ControlAffineSystem Sys>
ControlVector probe_coupling(const Sys& sys, const ControlTrajectory& ubar, std::size_t node,
                             const typename Sys::State& x, double epsilon, std::size_t threads = 1) {
  const ProbeResult probe = probe_xi(sys, ubar, node, x, epsilon, threads);
  const auto channels = sys.channels(ubar.grid().time(node), x);
  ControlVector gp(sys.control_dim(), 0.0);
  for (std::size_t j = 0; j < channels.size(); ++j) gp = axpy(gp, probe.xi[j], channels[j].gain);
  return gp;
}

/// Centered moving average in time per channel, truncated at the ends, re-projected onto B_R.
inline ControlTrajectory smooth_control(const ControlTrajectory& u, std::size_t window, double radius) {
  if (window == 0 || window % 2 == 0 || window > u.steps()) {
    throw ConfigError("smooth_control: window must be odd and <= steps, got " + std::to_string(window));
  }
  const std::size_t half = window / 2;
  const std::size_t steps = u.steps();
  std::vector<ControlVector> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(steps - 1, i + half);
    ControlVector acc(u.dim(), 0.0);
    for (std::size_t l = lo; l <= hi; ++l) acc = axpy(acc, 1.0, u[l]);
    out[i] = project_ball(scaled(1.0 / static_cast<double>(hi - lo + 1), acc), radius);
  }
  return ControlTrajectory(u.grid(), std::move(out));
}

template <ControlAffineSystem Sys>
DescentReport<typename Sys::State> monotone_descend(const Sys& sys, const typename Sys::State& x0,
                                                    const ControlTrajectory& u0, const MonotoneConfig& cfg = {}) {
  using State = typename Sys::State;
  const std::size_t steps = u0.steps();
  cfg.validate(steps);
  const double radius = sys.control_bound();
  const double epsilon = cfg.probe_radius();
  const std::size_t threads = cfg.worker_count();
  const std::vector<std::size_t> nodes = sample_nodes(steps, cfg.N);

  Stopwatch clock;
  ControlTrajectory ubar = project_ball(u0, radius);
  auto xbar = integrate_forward(sys, x0, ubar);
  CostBreakdown cost = total_cost(sys, xbar, ubar);

  DescentReport<State> report{{}, ubar, xbar, cost};
  report.records.push_back({0, cost, 0.0, 1, clock.elapsed_ms()});

  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    Stopwatch iter_clock;
    ControlTrajectory u = ubar;
    std::vector<State> states{x0};
    states.reserve(steps + 1);
    std::size_t solves = 0;

    for (std::size_t k = 0; k < cfg.N; ++k) {
      const std::size_t begin = nodes[k];
      const std::size_t end = nodes[k + 1];
      const State xk = states.back();

      // probe nodes inside [begin, end); gp is held after the last one and
      // interpolated linearly between them
      std::vector<std::size_t> probe_nodes;
      for (std::size_t q = 0; q < cfg.probes_per_subinterval; ++q) {
        const std::size_t n = begin + q * (end - begin) / cfg.probes_per_subinterval;
        if (probe_nodes.empty() || probe_nodes.back() != n) probe_nodes.push_back(n);
      }
      std::vector<ControlVector> gps;
      for (std::size_t n : probe_nodes) {
        gps.push_back(probe_coupling(sys, ubar, n, xk, epsilon, threads));
        solves += sys.control_dim() + 1;
      }
      for (std::size_t i = begin, q = 0; i < end; ++i) {
        while (q + 1 < probe_nodes.size() && i >= probe_nodes[q + 1]) ++q;
        ControlVector gp = gps[q];
        if (q + 1 < probe_nodes.size()) {
          const double w = static_cast<double>(i - probe_nodes[q]) /
                           static_cast<double>(probe_nodes[q + 1] - probe_nodes[q]);
          gp = axpy(scaled(1.0 - w, gps[q]), w, gps[q + 1]);
        }
        u[i] = feedback_minimizer(sys, gp);
      }

      const auto segment = integrate_forward(sys, xk, u, begin, end);
      ++solves;
      states.insert(states.end(), segment.states().begin() + 1, segment.states().end());
    }

    StatePath<State> x(u.grid(), 0, std::move(states));
    const CostBreakdown c = total_cost(sys, x, u);
    if (!(c.total < cost.total)) {
      report.stop = StopReason::no_decrease;
      break;
    }
    const double decrease = cost.total - c.total;
    const double previous = cost.total;
    ubar = std::move(u);
    xbar = std::move(x);
    cost = c;
    report.records.push_back({iter, cost, epsilon, solves, iter_clock.elapsed_ms()});
    if (decrease <= cfg.tol_rel * std::abs(previous)) {
      report.stop = StopReason::tolerance;
      break;
    }
  }

  report.control = std::move(ubar);
  report.path = std::move(xbar);
  report.cost = cost;

  if (cfg.smooth_output) {
    ControlTrajectory smoothed = smooth_control(report.control, cfg.effective_smooth_window(steps), radius);
    auto path = integrate_forward(sys, x0, smoothed);
    report.smoothed_cost = total_cost(sys, path, smoothed);
    report.smoothed_path = std::move(path);
    report.smoothed_control = std::move(smoothed);
  }
  return report;
}

}  // namespace banach_oc
