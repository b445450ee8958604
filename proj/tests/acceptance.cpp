// Acceptance run: one PASS/FAIL line per criterion, with the measured quantity and
// wall time. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "banach_oc/banach_oc.hpp"
#include "banach_oc/experiment.hpp"
#include "test_support.hpp"

namespace {

using namespace banach_oc;
using testing::random_control;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double slope(double coarse, double fine) { return std::log2(coarse / fine); }

// 1. Composed integration over random node triples reproduces direct integration bit for bit.
Outcome flow_semigroup() {
  const AmariSystem sys(AmariParams{}, CircleGrid(256));
  const TimeGrid g(3.0, 600);
  std::mt19937_64 rng(101);
  const auto u = random_control(rng, g, sys.control_dim(), 0.5);
  std::uniform_int_distribution<std::size_t> node(0, g.steps());
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t t[3] = {node(rng), node(rng), node(rng)};
    std::sort(std::begin(t), std::end(t));
    const auto x0 = testing::random_field(rng, sys.grid(), 4, 0.5);
    const auto direct = flow(sys, x0, u, t[0], t[2]);
    const auto composed = flow(sys, flow(sys, x0, u, t[0], t[1]), u, t[1], t[2]);
    if (!(direct == composed)) ++mismatches;
  }
  return {mismatches == 0, fmt("%zu/50 triples differ", mismatches)};
}

// 2. RK4 convergence slope on x' = -x.
Outcome rk4_order() {
  const testing::DecaySystem sys;
  std::vector<double> err;
  for (std::size_t steps : {50u, 100u, 200u, 400u}) {
    const TimeGrid g(3.0, steps);
    err.push_back(std::abs(flow(sys, 1.0, ControlTrajectory::zeros(g, 1), 0, steps) - std::exp(-3.0)));
  }
  double worst = 1e9;
  for (std::size_t i = 0; i + 1 < err.size(); ++i) worst = std::min(worst, slope(err[i], err[i + 1]));
  return {worst >= 3.9, fmt("min slope %.4f", worst)};
}

template <typename Sys>
double worst_gradient_error(const Sys& sys, const typename Sys::State& x0, TimeGrid g, std::mt19937_64& rng,
                            double scale) {
  const auto u = random_control(rng, g, sys.control_dim(), scale);
  const auto x = integrate_forward(sys, x0, u);
  const auto grad = cost_gradient(sys, x, integrate_adjoint(sys, x, u), u);
  double worst = 0.0;
  for (int d = 0; d < 10; ++d) {
    const auto du = random_control(rng, g, sys.control_dim());
    const double eta = 1e-5;
    const double fd = (evaluate_cost(sys, x0, testing::perturbed(u, eta, du)).total -
                       evaluate_cost(sys, x0, testing::perturbed(u, -eta, du)).total) /
                      (2 * eta);
    worst = std::max(worst, std::abs(time_inner(grad, du) - fd) / std::abs(fd));
  }
  return worst;
}

// 3. Adjoint directional derivative against central differences.
Outcome adjoint_gradient() {
  std::mt19937_64 rng(103);
  const AmariSystem amari(AmariParams{}, CircleGrid(128));
  const double a = worst_gradient_error(amari, amari.zero_state(), TimeGrid(3.0, 300), rng, 0.3);
  const LqToySystem lq({1.0, 1.0, 1.0});
  const double b = worst_gradient_error(lq, 0.0, TimeGrid(1.0, 100), rng, 1.0);
  return {a <= 1e-4 && b <= 1e-4, fmt("max rel err amari %.2e, lq %.2e", a, b)};
}

template <typename Sys>
double increment_error(const Sys& sys, const typename Sys::State& x0, const ControlTrajectory& ubar,
                       const ControlTrajectory& u, double eps) {
  const double exact = evaluate_cost(sys, x0, u).total - evaluate_cost(sys, x0, ubar).total;
  const CouplingProbe<typename Sys::State> probe = [&](std::size_t node, const typename Sys::State& x) {
    return probe_coupling(sys, ubar, node, x, eps, probe_thread_cap());
  };
  return std::abs(increment(sys, x0, ubar, u, probe) - exact);
}

// 4. Increment formula with finite-difference probes: first order in eps on LQ,
// absolute agreement on Amari at eps = 1/64, dt = 0.005.
Outcome increment_formula() {
  std::mt19937_64 rng(104);
  const LqToySystem lq({1.0, 1.0, 1.0});
  const TimeGrid gl(1.0, 64);
  const auto lbar = random_control(rng, gl, 1);
  const auto lu = random_control(rng, gl, 1);
  std::vector<double> err;
  for (double eps : {1.0 / 16, 1.0 / 32, 1.0 / 64}) err.push_back(increment_error(lq, 0.0, lbar, lu, eps));
  const double s = std::min(slope(err[0], err[1]), slope(err[1], err[2]));

  const AmariSystem amari(AmariParams{}, CircleGrid(256));
  const TimeGrid ga(3.0, 600);
  const auto abar = ControlTrajectory::zeros(ga, amari.control_dim());
  ControlTrajectory au = abar;
  const auto du = random_control(rng, ga, amari.control_dim(), 0.5);
  for (std::size_t i = 200; i < 300; ++i) au[i] = du[i];
  const double e = increment_error(amari, amari.zero_state(), abar, au, 1.0 / 64);
  return {s >= 0.9 && e <= 5e-3, fmt("lq eps-slope %.3f (errors %.2e %.2e %.2e); amari |err| %.2e", s, err[0], err[1],
                                     err[2], e)};
}

// 5. Both methods reach the LQ closed form.
Outcome lq_oracle() {
  const LqToyParams p{1.0, 1.0, 1.0};
  const LqToySystem sys(p);
  const TimeGrid g(1.0, 64);
  const auto u0 = ControlTrajectory::zeros(g, 1);
  const auto optimum = ControlTrajectory::constant(g, {p.optimal_control()});
  const auto pmp = pmp_descend(sys, 0.0, u0);
  MonotoneConfig mc;
  mc.N = 16;
  mc.epsilon = 1e-5;
  mc.max_iters = 50;
  const auto mono = monotone_descend(sys, 0.0, u0, mc);
  const double cp = sup_distance(pmp.control, optimum);
  const double cm = sup_distance(mono.control, optimum);
  const double jp = std::abs(pmp.cost.total - p.optimal_cost()) / p.optimal_cost();
  const double jm = std::abs(mono.cost.total - p.optimal_cost()) / p.optimal_cost();
  return {cp <= 1e-3 && cm <= 1e-3 && jp <= 1e-6 && jm <= 1e-6,
          fmt("pmp |u-u*| %.2e rel cost %.2e; monotone |u-u*| %.2e rel cost %.2e", cp, jp, cm, jm)};
}

// 6. Accepted monotone iterates never increase the cost.
Outcome monotonicity() {
  bool ok = true;
  std::string detail;
  {
    const LqToySystem sys({1.0, 1.0, 1.0});
    MonotoneConfig mc;
    mc.N = 16;
    mc.max_iters = 20;
    const auto r = monotone_descend(sys, 0.0, ControlTrajectory::zeros(TimeGrid(1.0, 64), 1), mc);
    ok = ok && r.monotone(1e-10);
    detail += fmt("lq %zu it", r.iterations());
  }
  for (std::size_t n : {128u, 256u}) {
    const AmariSystem sys(AmariParams{}, CircleGrid(n));
    for (std::size_t N : {16u, 32u}) {
      MonotoneConfig mc;
      mc.N = N;
      mc.max_iters = 3;
      const auto r = monotone_descend(sys, sys.zero_state(), ControlTrajectory::zeros(TimeGrid(3.0, 600), 7), mc);
      ok = ok && r.monotone(1e-10);
      detail += fmt("; n=%zu N=%zu %zu it %s", n, N, r.iterations(), r.monotone(1e-10) ? "ok" : "INCREASE");
    }
  }
  return {ok, detail};
}

struct DefaultRuns {
  CostBreakdown baseline;
  DescentReport<GridFunction> pmp;
  DescentReport<GridFunction> mono;
  double pmp_residual = 0.0;
};

DefaultRuns& default_runs() {
  static DefaultRuns runs = [] {
    const ExperimentConfig cfg;
    const AmariSystem sys(cfg.amari, CircleGrid(cfg.n));
    const auto u0 = ControlTrajectory::zeros(cfg.time_grid(), sys.control_dim());
    MonotoneConfig mc = cfg.monotone;
    mc.max_iters = 1;
    auto pmp = pmp_descend(sys, sys.zero_state(), u0, cfg.pmp);
    auto mono = monotone_descend(sys, sys.zero_state(), u0, mc);
    const double res = banach_oc::pmp_residual(sys, sys.zero_state(), pmp.control);
    return DefaultRuns{evaluate_cost(sys, sys.zero_state(), u0), std::move(pmp), std::move(mono), res};
  }();
  return runs;
}

// 7. One monotone iteration against 40 PMP iterations on the default setup.
Outcome single_iteration_claim() {
  const auto& r = default_runs();
  const double ratio = r.mono.cost.total / r.pmp.cost.total;
  const bool tracking = r.pmp.cost.terminal < r.baseline.terminal && r.mono.cost.terminal < r.baseline.terminal;
  return {ratio <= 1.10 && tracking,
          fmt("monotone(1 it) %.6g vs pmp(%zu it, %s) %.6g, ratio %.3f (limit 1.10); terminal u=0 %.4g pmp %.4g "
              "monotone %.4g",
              r.mono.cost.total, r.pmp.iterations(), std::string(to_string(r.pmp.stop)).c_str(), r.pmp.cost.total,
              ratio, r.baseline.terminal, r.pmp.cost.terminal, r.mono.cost.terminal)};
}

// 8. Extremality residual at the returned PMP control.
Outcome pmp_residual_check() {
  const LqToySystem sys({1.0, 1.0, 1.0});
  const auto r = pmp_descend(sys, 0.0, ControlTrajectory::zeros(TimeGrid(1.0, 64), 1));
  const double lq = pmp_residual(sys, 0.0, r.control);
  return {lq <= 1e-4, fmt("lq %.2e (limit 1e-4); amari default %.4e (reported)", lq, default_runs().pmp_residual)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "flow semigroup", 5.0, flow_semigroup},
      {2, "rk4 order", 1.0, rk4_order},
      {3, "adjoint gradient", 30.0, adjoint_gradient},
      {4, "increment formula", 60.0, increment_formula},
      {5, "lq oracle", 10.0, lq_oracle},
      {6, "monotonicity", 120.0, monotonicity},
      {7, "single monotone iteration vs pmp", 300.0, single_iteration_claim},
      {8, "pmp residual", 300.0, pmp_residual_check},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Stopwatch clock;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = clock.elapsed_ms() / 1000.0;
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s [%d] %s: %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
