#pragma once

// Experiment runner behind the command-line tool: flat `key = value` configuration,
// the simulate / optimize / compare runs and their CSV outputs.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "banach_oc/amari.hpp"
#include "banach_oc/cost.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/errors.hpp"
#include "banach_oc/lq_toy.hpp"
#include "banach_oc/monotone.hpp"
#include "banach_oc/pmp.hpp"
#include "banach_oc/report.hpp"

namespace banach_oc {

enum class SystemKind { amari, lq_toy };
enum class Method { pmp, monotone, both };
enum class InitialState { zero, target };

struct ExperimentConfig {
  SystemKind system = SystemKind::amari;
  AmariParams amari;
  double target = 1.0;  // lq_toy terminal target
  double horizon = 3.0;
  std::size_t steps = 600;
  std::size_t n = 256;
  Method method = Method::both;
  PmpConfig pmp;
  MonotoneConfig monotone;
  std::string out = "out";
  unsigned long seed = 0;
  InitialState initial_state = InitialState::zero;
  bool disable_drift = false;
  std::string control_file;
  bool record_wall_time = true;

  TimeGrid time_grid() const { return TimeGrid(horizon, steps); }

  LqToyParams lq_params() const { return LqToyParams{amari.alpha, target, horizon, amari.R}; }

  void validate() const {
    (void)time_grid();
    (void)CircleGrid(n);
    pmp.validate();
    monotone.validate(steps);
    if (system == SystemKind::amari) {
      amari.validate();
      (void)fourier_basis(CircleGrid(n), amari.K);
    } else {
      lq_params().validate();
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError(source, line, "expected a number, got '" + text + "'");
  return v;
}

inline unsigned long parse_unsigned(const std::string& text, const std::string& source, std::size_t line) {
  unsigned long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InputError(source, line, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& text, const std::string& source, std::size_t line) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InputError(source, line, "expected true or false, got '" + text + "'");
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

}  // namespace detail

inline std::string to_string(SystemKind s) { return s == SystemKind::amari ? "amari" : "lq_toy"; }
inline std::string to_string(Method m) {
  switch (m) {
    case Method::pmp: return "pmp";
    case Method::monotone: return "monotone";
    case Method::both: return "both";
  }
  return "both";
}

inline Method parse_method(const std::string& text) {
  if (text == "pmp") return Method::pmp;
  if (text == "monotone") return Method::monotone;
  if (text == "both") return Method::both;
  throw ConfigError("unknown method '" + text + "' (expected pmp, monotone or both)");
}

/// Applies one `key = value` assignment. Throws InputError for unknown keys or bad values.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                          const std::string& source = "<config>", std::size_t line = 0) {
  auto num = [&] { return detail::parse_double(value, source, line); };
  auto count = [&] { return static_cast<std::size_t>(detail::parse_unsigned(value, source, line)); };
  auto flag = [&] { return detail::parse_bool(value, source, line); };

  if (key == "system") {
    if (value == "amari") cfg.system = SystemKind::amari;
    else if (value == "lq_toy") cfg.system = SystemKind::lq_toy;
    else throw InputError(source, line, "system must be amari or lq_toy");
  } else if (key == "gamma") cfg.amari.gamma = num();
  else if (key == "beta") cfg.amari.beta = num();
  else if (key == "vartheta") cfg.amari.vartheta = num();
  else if (key == "kappa") cfg.amari.kappa = num();
  else if (key == "K") cfg.amari.K = count();
  else if (key == "A_d") cfg.amari.A_d = num();
  else if (key == "kappa_d") cfg.amari.kappa_d = num();
  else if (key == "theta_star") cfg.amari.theta_star = num();
  else if (key == "alpha") cfg.amari.alpha = num();
  else if (key == "R") cfg.amari.R = num();
  else if (key == "target") cfg.target = num();
  else if (key == "T") cfg.horizon = num();
  else if (key == "steps") cfg.steps = count();
  else if (key == "n") cfg.n = count();
  else if (key == "method") {
    try {
      cfg.method = parse_method(value);
    } catch (const ConfigError& e) {
      throw InputError(source, line, e.what());
    }
  } else if (key == "pmp_max_iters") cfg.pmp.max_iters = count();
  else if (key == "pmp_eta0") cfg.pmp.eta0 = num();
  else if (key == "pmp_backtrack_factor") cfg.pmp.backtrack_factor = num();
  else if (key == "pmp_eta_min") cfg.pmp.eta_min = num();
  else if (key == "pmp_tol_rel") cfg.pmp.tol_rel = num();
  else if (key == "N") cfg.monotone.N = count();
  else if (key == "epsilon") cfg.monotone.epsilon = num();
  else if (key == "mono_max_iters") cfg.monotone.max_iters = count();
  else if (key == "mono_tol_rel") cfg.monotone.tol_rel = num();
  else if (key == "smooth_output") cfg.monotone.smooth_output = flag();
  else if (key == "smooth_window") cfg.monotone.smooth_window = count();
  else if (key == "probes_per_subinterval") cfg.monotone.probes_per_subinterval = count();
  else if (key == "out") cfg.out = value;
  else if (key == "seed") cfg.seed = detail::parse_unsigned(value, source, line);
  else if (key == "initial_state") {
    if (value == "zero") cfg.initial_state = InitialState::zero;
    else if (value == "target") cfg.initial_state = InitialState::target;
    else throw InputError(source, line, "initial_state must be zero or target");
  } else if (key == "disable_drift") cfg.disable_drift = flag();
  else if (key == "control_file") cfg.control_file = value;
  else if (key == "record_wall_time") cfg.record_wall_time = flag();
  else throw InputError(source, line, "unknown key '" + key + "'");
}

/// Parses `key = value` lines; `#` starts a comment. Later keys override earlier ones.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>",
                                     ExperimentConfig cfg = {}) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = detail::trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InputError(source, line, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(text).substr(0, eq));
    const std::string value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw InputError(source, line, "missing key");
    apply_setting(cfg, key, value, source, line);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults = {}) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open config file");
  return parse_config(in, path.string(), std::move(defaults));
}

/// The effective configuration, one key per line; reloading it reproduces the run.
inline std::string write_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto d = detail::format_double;
  os << "# effective configuration\n";
  os << "system = " << to_string(cfg.system) << "\n";
  os << "gamma = " << d(cfg.amari.gamma) << "\n";
  os << "beta = " << d(cfg.amari.beta) << "\n";
  os << "vartheta = " << d(cfg.amari.vartheta) << "\n";
  os << "kappa = " << d(cfg.amari.kappa) << "\n";
  os << "K = " << cfg.amari.K << "\n";
  os << "A_d = " << d(cfg.amari.A_d) << "\n";
  os << "kappa_d = " << d(cfg.amari.kappa_d) << "\n";
  os << "theta_star = " << d(cfg.amari.theta_star) << "\n";
  os << "alpha = " << d(cfg.amari.alpha) << "\n";
  os << "R = " << d(cfg.amari.R) << "\n";
  os << "target = " << d(cfg.target) << "\n";
  os << "T = " << d(cfg.horizon) << "\n";
  os << "steps = " << cfg.steps << "\n";
  os << "n = " << cfg.n << "\n";
  os << "method = " << to_string(cfg.method) << "\n";
  os << "pmp_max_iters = " << cfg.pmp.max_iters << "\n";
  os << "pmp_eta0 = " << d(cfg.pmp.eta0) << "\n";
  os << "pmp_backtrack_factor = " << d(cfg.pmp.backtrack_factor) << "\n";
  os << "pmp_eta_min = " << d(cfg.pmp.eta_min) << "\n";
  os << "pmp_tol_rel = " << d(cfg.pmp.tol_rel) << "\n";
  os << "N = " << cfg.monotone.N << "\n";
  os << "epsilon = " << d(cfg.monotone.probe_radius()) << "\n";
  os << "mono_max_iters = " << cfg.monotone.max_iters << "\n";
  os << "mono_tol_rel = " << d(cfg.monotone.tol_rel) << "\n";
  os << "smooth_output = " << (cfg.monotone.smooth_output ? "true" : "false") << "\n";
  os << "smooth_window = " << cfg.monotone.smooth_window << "\n";
  os << "probes_per_subinterval = " << cfg.monotone.probes_per_subinterval << "\n";
  os << "out = " << cfg.out << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "initial_state = " << (cfg.initial_state == InitialState::zero ? "zero" : "target") << "\n";
  os << "disable_drift = " << (cfg.disable_drift ? "true" : "false") << "\n";
  if (!cfg.control_file.empty()) os << "control_file = " << cfg.control_file << "\n";
  os << "record_wall_time = " << (cfg.record_wall_time ? "true" : "false") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV output

/// Column names of the control channels: u0, u1c, u1s, ..., uKc, uKs.
inline std::vector<std::string> channel_names(std::size_t m) {
  std::vector<std::string> names{"u0"};
  for (std::size_t k = 1; names.size() < m; ++k) {
    names.push_back("u" + std::to_string(k) + "c");
    if (names.size() < m) names.push_back("u" + std::to_string(k) + "s");
  }
  names.resize(m);
  return names;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }

  void header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << detail::format_double(values[i]);
    out_ << "\n";
  }

  void raw_row(const std::vector<std::string>& cells) { header(cells); }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_control_csv(const std::filesystem::path& path, const ControlTrajectory& u) {
  CsvWriter w(path);
  std::vector<std::string> cols{"t"};
  for (auto& c : channel_names(u.dim())) cols.push_back(c);
  w.header(cols);
  for (std::size_t i = 0; i < u.steps(); ++i) {
    std::vector<double> row{u.grid().time(i)};
    row.insert(row.end(), u[i].begin(), u[i].end());
    w.row(row);
  }
}

/// Reads a control.csv (header t,u0,...) with one row per integration step.
inline ControlTrajectory read_control_csv(const std::filesystem::path& path, TimeGrid grid, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open control file");
  const std::string source = path.string();
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw InputError(source, 1, "empty control file");
  ++lineno;
  const auto head = detail::split_csv(line);
  if (head.size() != dim + 1 || head.front() != "t") {
    throw InputError(source, lineno, "expected header t plus " + std::to_string(dim) + " channel columns");
  }
  std::vector<ControlVector> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != dim + 1) throw InputError(source, lineno, "wrong number of columns");
    ControlVector v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = detail::parse_double(cells[j + 1], source, lineno);
    values.push_back(std::move(v));
  }
  if (values.size() != grid.steps()) {
    throw InputError(source, lineno,
                     "expected " + std::to_string(grid.steps()) + " rows, got " + std::to_string(values.size()));
  }
  return ControlTrajectory(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// State-specific output helpers

inline std::vector<std::vector<double>> profile_rows(const AmariSystem& sys, const GridFunction& xT) {
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < xT.size(); ++j) rows.push_back({sys.grid().theta(j), xT[j], sys.target()[j]});
  return rows;
}

inline std::vector<std::vector<double>> profile_rows(const LqToySystem& sys, double xT) {
  return {{0.0, xT, sys.params().target}};
}

template <ControlAffineSystem Sys>
void write_profile_csv(const std::filesystem::path& path, const Sys& sys, const typename Sys::State& xT) {
  CsvWriter w(path);
  w.header({"theta", "N_T", "N_des"});
  for (const auto& r : profile_rows(sys, xT)) w.row(r);
}

inline void write_cost_log(const std::filesystem::path& path, const std::vector<IterationRecord>& records,
                           bool wall_time) {
  CsvWriter w(path);
  w.header({"iter", "total", "terminal", "energy", "wall_ms"});
  for (const auto& r : records) {
    w.row({static_cast<double>(r.iteration), r.cost.total, r.cost.terminal, r.cost.energy,
           wall_time ? r.wall_ms : 0.0});
  }
}

/// Calls fn(system, x0) with the system the config selects.
template <typename Fn>
decltype(auto) with_system(const ExperimentConfig& cfg, Fn&& fn) {
  if (cfg.system == SystemKind::amari) {
    AmariSystem sys(cfg.amari, CircleGrid(cfg.n));
    sys.set_drift_enabled(!cfg.disable_drift);
    const GridFunction x0 = cfg.initial_state == InitialState::target ? sys.target() : sys.zero_state();
    return fn(sys, x0);
  }
  LqToySystem sys(cfg.lq_params());
  const double x0 = cfg.initial_state == InitialState::target ? cfg.target : 0.0;
  return fn(sys, x0);
}

// ---------------------------------------------------------------------------
// Runs

struct SimulateResult {
  CostBreakdown cost;
};

/// Integrates under the control file (zero control when none); writes profile.csv and energy.csv.
inline SimulateResult run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out);
  const std::filesystem::path out(cfg.out);
  return with_system(cfg, [&](const auto& sys, const auto& x0) {
    const TimeGrid grid = cfg.time_grid();
    const ControlTrajectory u = cfg.control_file.empty()
                                    ? ControlTrajectory::zeros(grid, sys.control_dim())
                                    : read_control_csv(cfg.control_file, grid, sys.control_dim());
    const auto x = integrate_forward(sys, x0, u);
    write_profile_csv(out / "profile.csv", sys, x.back());
    CsvWriter energy(out / "energy.csv");
    energy.header({"t", "norm_L2"});
    for (std::size_t i = 0; i <= grid.steps(); ++i) {
      energy.row({grid.time(i), std::sqrt(sys.inner(x.at(i), x.at(i)))});
    }
    return SimulateResult{total_cost(sys, x, u)};
  });
}

struct MethodSummary {
  std::string method;
  std::size_t iterations = 0;
  CostBreakdown cost;
  double wall_ms = 0.0;
  bool monotone = true;
  std::string stop;
};

struct OptimizeResult {
  CostBreakdown baseline;
  std::vector<MethodSummary> methods;
  bool monotone = true;
};

namespace detail {

template <typename State>
MethodSummary summarize(const std::string& name, const DescentReport<State>& r, double wall_ms) {
  return {name, r.iterations(), r.cost, wall_ms, r.monotone(1e-10), std::string(to_string(r.stop))};
}

inline void write_summary(const std::filesystem::path& path, const OptimizeResult& res, bool wall_time) {
  CsvWriter w(path);
  w.header({"method", "iterations", "total", "terminal", "energy", "wall_ms", "monotone", "stop"});
  auto emit = [&](const MethodSummary& m) {
    w.raw_row({m.method, std::to_string(m.iterations), format_double(m.cost.total), format_double(m.cost.terminal),
               format_double(m.cost.energy), format_double(wall_time ? m.wall_ms : 0.0), m.monotone ? "1" : "0",
               m.stop});
  };
  emit({"baseline", 0, res.baseline, 0.0, true, "none"});
  for (const auto& m : res.methods) emit(m);
}

template <ControlAffineSystem Sys>
struct MethodRuns {
  std::optional<DescentReport<typename Sys::State>> pmp;
  std::optional<DescentReport<typename Sys::State>> monotone;
  double pmp_ms = 0.0;
  double monotone_ms = 0.0;
};

template <ControlAffineSystem Sys>
MethodRuns<Sys> run_methods(const ExperimentConfig& cfg, const Sys& sys, const typename Sys::State& x0,
                            Method method) {
  MethodRuns<Sys> runs;
  const ControlTrajectory u0 = ControlTrajectory::zeros(cfg.time_grid(), sys.control_dim());
  if (method != Method::monotone) {
    Stopwatch clock;
    runs.pmp = pmp_descend(sys, x0, u0, cfg.pmp);
    runs.pmp_ms = clock.elapsed_ms();
  }
  if (method != Method::pmp) {
    Stopwatch clock;
    runs.monotone = monotone_descend(sys, x0, u0, cfg.monotone);
    runs.monotone_ms = clock.elapsed_ms();
  }
  return runs;
}

}  // namespace detail

/// Runs the selected method(s) from u = 0; writes cost_log.csv, control.csv and profile.csv
/// (suffixed _pmp / _monotone when both run) and comparison.csv.
inline OptimizeResult run_optimize(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out);
  const std::filesystem::path out(cfg.out);
  return with_system(cfg, [&](const auto& sys, const auto& x0) {
    OptimizeResult res;
    res.baseline = evaluate_cost(sys, x0, ControlTrajectory::zeros(cfg.time_grid(), sys.control_dim()));
    const auto runs = detail::run_methods(cfg, sys, x0, cfg.method);
    const bool both = cfg.method == Method::both;
    auto emit = [&](const std::string& name, const auto& report, double ms) {
      const std::string suffix = both ? "_" + name : "";
      write_cost_log(out / ("cost_log" + suffix + ".csv"), report.records, cfg.record_wall_time);
      write_control_csv(out / ("control" + suffix + ".csv"), report.control);
      write_profile_csv(out / ("profile" + suffix + ".csv"), sys, report.path.back());
      res.methods.push_back(detail::summarize(name, report, ms));
      if (report.smoothed_control) {
        write_control_csv(out / ("control" + suffix + "_smoothed.csv"), *report.smoothed_control);
        MethodSummary s{name + "_smoothed", report.iterations(), *report.smoothed_cost, 0.0, true, "smoothed"};
        res.methods.push_back(s);
      }
    };
    if (runs.pmp) emit("pmp", *runs.pmp, runs.pmp_ms);
    if (runs.monotone) emit("monotone", *runs.monotone, runs.monotone_ms);
    for (const auto& m : res.methods) res.monotone = res.monotone && m.monotone;
    detail::write_summary(out / "comparison.csv", res, cfg.record_wall_time);
    return res;
  });
}

/// Runs both methods and writes the merged compare_profiles.csv / compare_controls.csv.
inline OptimizeResult run_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out);
  const std::filesystem::path out(cfg.out);
  return with_system(cfg, [&](const auto& sys, const auto& x0) {
    OptimizeResult res;
    res.baseline = evaluate_cost(sys, x0, ControlTrajectory::zeros(cfg.time_grid(), sys.control_dim()));
    const auto runs = detail::run_methods(cfg, sys, x0, Method::both);
    const auto& pmp = *runs.pmp;
    const auto& mono = *runs.monotone;
    res.methods.push_back(detail::summarize("pmp", pmp, runs.pmp_ms));
    res.methods.push_back(detail::summarize("monotone", mono, runs.monotone_ms));
    if (mono.smoothed_cost) {
      res.methods.push_back({"monotone_smoothed", mono.iterations(), *mono.smoothed_cost, 0.0, true, "smoothed"});
    }
    res.monotone = pmp.monotone(1e-10) && mono.monotone(1e-10);

    {
      CsvWriter w(out / "compare_profiles.csv");
      std::vector<std::string> cols{"theta", "N_des", "N_T_pmp", "N_T_monotone"};
      if (mono.smoothed_path) cols.push_back("N_T_monotone_smoothed");
      w.header(cols);
      const auto p = profile_rows(sys, pmp.path.back());
      const auto m = profile_rows(sys, mono.path.back());
      std::optional<std::vector<std::vector<double>>> s;
      if (mono.smoothed_path) s = profile_rows(sys, mono.smoothed_path->back());
      for (std::size_t j = 0; j < p.size(); ++j) {
        std::vector<double> row{p[j][0], p[j][2], p[j][1], m[j][1]};
        if (s) row.push_back((*s)[j][1]);
        w.row(row);
      }
    }
    {
      CsvWriter w(out / "compare_controls.csv");
      std::vector<std::string> cols{"t"};
      const auto names = channel_names(sys.control_dim());
      for (const auto& c : names) cols.push_back("pmp_" + c);
      for (const auto& c : names) cols.push_back("monotone_" + c);
      if (mono.smoothed_control) {
        for (const auto& c : names) cols.push_back("monotone_smoothed_" + c);
      }
      w.header(cols);
      for (std::size_t i = 0; i < pmp.control.steps(); ++i) {
        std::vector<double> row{pmp.control.grid().time(i)};
        row.insert(row.end(), pmp.control[i].begin(), pmp.control[i].end());
        row.insert(row.end(), mono.control[i].begin(), mono.control[i].end());
        if (mono.smoothed_control) {
          row.insert(row.end(), (*mono.smoothed_control)[i].begin(), (*mono.smoothed_control)[i].end());
        }
        w.row(row);
      }
    }
    detail::write_summary(out / "comparison.csv", res, cfg.record_wall_time);
    return res;
  });
}

}  // namespace banach_oc
