#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "banach_oc/cost.hpp"
#include "banach_oc/dynamics.hpp"

namespace banach_oc {

enum class StopReason {
  max_iterations,
  tolerance,    // relative decrease below tol_rel
  no_decrease,  // line search exhausted or candidate rejected
};

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::tolerance: return "tolerance";
    case StopReason::no_decrease: return "no_decrease";
  }
  return "unknown";
}

struct IterationRecord {
  std::size_t iteration = 0;
  CostBreakdown cost;
  double step = 0.0;              // accepted eta (PMP) or probe radius (monotone)
  std::size_t forward_solves = 0; // flow solves spent on this iteration
  double wall_ms = 0.0;
};

/// Iteration 0 holds the initial control; each later record is an accepted iterate.
template <typename State>
struct DescentReport {
  std::vector<IterationRecord> records;
  ControlTrajectory control;
  StatePath<State> path;
  CostBreakdown cost;
  StopReason stop = StopReason::max_iterations;
  std::optional<ControlTrajectory> smoothed_control;
  std::optional<CostBreakdown> smoothed_cost;
  std::optional<StatePath<State>> smoothed_path;

  std::size_t iterations() const noexcept { return records.empty() ? 0 : records.size() - 1; }

  /// Accepted totals are nonincreasing up to slack.
  bool monotone(double slack = 1e-10) const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].cost.total > records[i - 1].cost.total + slack) return false;
    }
    return true;
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace banach_oc
