#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "banach_oc/amari.hpp"
#include "banach_oc/cost.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/lq_toy.hpp"
#include "test_support.hpp"

namespace banach_oc {
namespace {

using testing::DecaySystem;
using testing::random_control;

TEST(TimeGrid, NodesCoverHorizon) {
  const TimeGrid g(3.0, 600);
  EXPECT_DOUBLE_EQ(g.dt(), 0.005);
  EXPECT_EQ(g.time(0), 0.0);
  EXPECT_EQ(g.time(600), 3.0);
  EXPECT_THROW(TimeGrid(3.0, 0), ConfigError);
  EXPECT_THROW(TimeGrid(0.0, 10), ConfigError);
}

TEST(ControlTrajectory, ShapeChecks) {
  const TimeGrid g(1.0, 4);
  EXPECT_THROW(ControlTrajectory(g, std::vector<ControlVector>(3, {0.0})), DimensionError);
  EXPECT_THROW(ControlTrajectory(g, {{0.0}, {0.0}, {0.0, 1.0}, {0.0}}), DimensionError);
  const auto u = ControlTrajectory::constant(g, {3.0, 4.0});
  EXPECT_TRUE(is_admissible(u, 5.0));
  EXPECT_FALSE(is_admissible(u, 4.9));
  const auto p = project_ball(u, 1.0);
  EXPECT_NEAR(p[2][0], 0.6, 1e-15);
  EXPECT_NEAR(p[2][1], 0.8, 1e-15);
}

TEST(IntegrateForward, ZeroFieldKeepsInitialState) {
  const LqToySystem sys({1.0, 1.0, 1.0});
  const TimeGrid g(1.0, 10);
  const auto x = integrate_forward(sys, 0.42, ControlTrajectory::zeros(g, 1));
  for (double v : x.states()) EXPECT_EQ(v, 0.42);
}

TEST(IntegrateForward, LqConstantControlIsExact) {
  const LqToySystem sys({1.0, 1.0, 1.0});
  const TimeGrid g(1.0, 37);
  const auto x = integrate_forward(sys, 0.0, ControlTrajectory::constant(g, {0.3}));
  EXPECT_NEAR(x.back(), 0.3, 1e-15);
}

TEST(IntegrateForward, Rk4FourthOrderOnExponentialDecay) {
  const DecaySystem sys;
  std::vector<double> errors;
  for (std::size_t steps : {100u, 200u, 400u}) {
    const TimeGrid g(3.0, steps);
    const double xT = flow(sys, 1.0, ControlTrajectory::zeros(g, 1), 0, steps);
    errors.push_back(std::abs(xT - std::exp(-3.0)));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double rate = std::log2(errors[i] / errors[i + 1]);
    EXPECT_GE(rate, 3.9);
    EXPECT_NEAR(errors[i] / errors[i + 1], 16.0, 0.5);
  }
}

TEST(IntegrateForward, FlowCompositionIsBitIdentical) {
  const AmariSystem sys(AmariParams{}, CircleGrid(64));
  const TimeGrid g(3.0, 90);
  std::mt19937_64 rng(21);
  const auto u = random_control(rng, g, sys.control_dim(), 0.5);
  const auto x0 = testing::random_field(rng, CircleGrid(64));
  const auto direct = integrate_forward(sys, x0, u);
  for (auto [t0, t1, t2] : {std::tuple{0u, 30u, 90u}, {10u, 10u, 50u}, {5u, 60u, 61u}}) {
    const auto a = flow(sys, direct.at(t0), u, t0, t1);
    const auto b = flow(sys, a, u, t1, t2);
    EXPECT_EQ(b, direct.at(t2));
    EXPECT_EQ(flow(sys, direct.at(t0), u, t0, t0), direct.at(t0));
  }
  const auto partial = integrate_forward(sys, direct.at(30), u, 30, 60);
  EXPECT_EQ(partial.first_step(), 30u);
  EXPECT_EQ(partial.at(60), direct.at(60));
}

TEST(IntegrateForward, DeterministicAndRangeChecked) {
  const AmariSystem sys(AmariParams{}, CircleGrid(32));
  const TimeGrid g(1.0, 20);
  std::mt19937_64 rng(2);
  const auto u = random_control(rng, g, sys.control_dim());
  EXPECT_EQ(integrate_forward(sys, sys.zero_state(), u), integrate_forward(sys, sys.zero_state(), u));
  EXPECT_THROW(integrate_forward(sys, sys.zero_state(), u, 5, 3), DimensionError);
  EXPECT_THROW(integrate_forward(sys, sys.zero_state(), u, 0, 21), DimensionError);
}

TEST(IntegrateForward, DivergenceReportsStep) {
  const testing::BlowupSystem sys;
  const TimeGrid g(3.0, 300);
  try {
    integrate_forward(sys, 1.0, ControlTrajectory::zeros(g, 1));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.step(), 0u);
    EXPECT_LE(e.step(), 300u);
    EXPECT_FALSE(e.channel().has_value());
  }
}

TEST(IntegrateAdjoint, ZeroTerminalDataGivesZeroAdjoint) {
  const LqToySystem sys({1.0, 1.0, 1.0});
  const TimeGrid g(1.0, 16);
  const auto u = ControlTrajectory::constant(g, {1.0});  // x_T = target
  const auto x = integrate_forward(sys, 0.0, u);
  const auto psi = integrate_adjoint(sys, x, u);
  for (double p : psi.states()) EXPECT_NEAR(p, 0.0, 1e-15);
}

TEST(IntegrateAdjoint, LqAdjointIsConstant) {
  const LqToySystem sys({1.0, 2.0, 1.0});
  const TimeGrid g(1.0, 16);
  std::mt19937_64 rng(3);
  const auto u = random_control(rng, g, 1);
  const auto x = integrate_forward(sys, 0.0, u);
  const auto psi = integrate_adjoint(sys, x, u);
  ASSERT_EQ(psi.size(), 17u);
  for (double p : psi.states()) EXPECT_EQ(p, x.back() - 2.0);
}

TEST(IntegrateAdjoint, DecaySystemMatchesClosedForm) {
  // psi' = psi, psi_T = x_T  =>  psi_t = x_T e^{t - T}
  const DecaySystem sys;
  const TimeGrid g(3.0, 300);
  const auto u = ControlTrajectory::zeros(g, 1);
  const auto x = integrate_forward(sys, 1.0, u);
  const auto psi = integrate_adjoint(sys, x, u);
  EXPECT_NEAR(psi.at(0), x.back() * std::exp(-3.0), 1e-10);
}

TEST(IntegrateAdjoint, RequiresFullPath) {
  const LqToySystem sys({1.0, 1.0, 1.0});
  const TimeGrid g(1.0, 8);
  const auto u = ControlTrajectory::zeros(g, 1);
  const auto x = integrate_forward(sys, 0.0, u, 2, 8);
  EXPECT_THROW(integrate_adjoint(sys, x, u), DimensionError);
}

template <typename Sys>
double gradient_mismatch(const Sys& sys, const typename Sys::State& x0, const ControlTrajectory& u,
                         const ControlTrajectory& du) {
  const auto x = integrate_forward(sys, x0, u);
  const auto psi = integrate_adjoint(sys, x, u);
  const double adjoint = time_inner(cost_gradient(sys, x, psi, u), du);
  const double eta = 1e-5;
  const double fd = (evaluate_cost(sys, x0, testing::perturbed(u, eta, du)).total -
                     evaluate_cost(sys, x0, testing::perturbed(u, -eta, du)).total) /
                    (2 * eta);
  return std::abs(adjoint - fd) / std::abs(fd);
}

TEST(IntegrateAdjoint, GradientMatchesCentralDifferencesLq) {
  const LqToySystem sys({0.5, 1.0, 1.0});
  const TimeGrid g(1.0, 50);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    EXPECT_LE(gradient_mismatch(sys, 0.0, random_control(rng, g, 1), random_control(rng, g, 1)), 1e-4);
  }
}

TEST(IntegrateAdjoint, GradientMatchesCentralDifferencesAmari) {
  const AmariSystem sys(AmariParams{}, CircleGrid(64));
  const TimeGrid g(3.0, 150);
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 3; ++trial) {
    const auto u = random_control(rng, g, sys.control_dim(), 0.3);
    EXPECT_LE(gradient_mismatch(sys, sys.zero_state(), u, random_control(rng, g, sys.control_dim())), 1e-4);
  }
}

TEST(ConcatControls, Endpoints) {
  const TimeGrid g(1.0, 10);
  std::mt19937_64 rng(4);
  const auto u = random_control(rng, g, 2);
  const auto ubar = random_control(rng, g, 2);
  EXPECT_EQ(concat_controls(u, ubar, 0), ubar);
  EXPECT_EQ(concat_controls(u, ubar, 10), u);
  const auto mid = concat_controls(u, ubar, 4);
  EXPECT_EQ(mid[3], u[3]);
  EXPECT_EQ(mid[4], ubar[4]);
  EXPECT_THROW(concat_controls(u, ubar, 11), DimensionError);
}

TEST(ConcatControls, TailIsBaselineFlowFromSwitchState) {
  const AmariSystem sys(AmariParams{}, CircleGrid(32));
  const TimeGrid g(3.0, 60);
  std::mt19937_64 rng(5);
  const auto u = random_control(rng, g, sys.control_dim(), 0.5);
  const auto ubar = random_control(rng, g, sys.control_dim(), 0.5);
  const std::size_t s = 25;
  const auto x_u = integrate_forward(sys, sys.zero_state(), u);
  const auto x_cat = integrate_forward(sys, sys.zero_state(), concat_controls(u, ubar, s));
  const auto tail = integrate_forward(sys, x_u.at(s), ubar, s, 60);
  for (std::size_t t = s; t <= 60; ++t) EXPECT_EQ(x_cat.at(t), tail.at(t));
}

}  // namespace
}  // namespace banach_oc
