#include "erasure/cli.hpp"

#include "erasure/asymptotic_bounds.hpp"
#include "erasure/channel_bounds.hpp"
#include "erasure/continuous_detection.hpp"
#include "erasure/entangled_iss.hpp"
#include "erasure/optimize.hpp"
#include "erasure/qec_protocols.hpp"
#include "erasure/spin_squeezing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace erasure {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  }
  if (pos != text.size()) throw ConfigError("'" + key + "': trailing characters in '" + text + "'");
  if (std::isnan(v)) throw ConfigError("'" + key + "': NaN is not a valid value");
  return v;
}

long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_real(key, text);
  const double r = std::round(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v)) || std::abs(r) > 1e15)
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  return static_cast<long>(r);
}

// Key lookups for one sweep point; every key in the config must be read.
class Params {
 public:
  explicit Params(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double real(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_real(key, it->second);
  }

  int integer(const std::string& key, int fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const long v = parse_integer(key, it->second);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw ConfigError("'" + key + "': integer out of range");
    return static_cast<int>(v);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  ErasureModel model(double gamma1, double gamma2, double omega, double theta) {
    std::vector<std::pair<std::string, std::string>> matrix;
    for (const auto& [key, value] : values_) {
      if (key.rfind("model.gamma[", 0) == 0 || key == "model.k") {
        matrix.emplace_back(key.substr(6), value);
        used_.insert(key);
      }
    }
    if (matrix.empty()) {
      return ErasureModel::single(real("model.gamma1", gamma1), real("model.gamma2", gamma2), real("model.omega", omega),
                                  real("model.theta", theta));
    }
    if (has("model.gamma1") || has("model.gamma2"))
      throw ConfigError("model: give either model.gamma1/gamma2 or model.gamma[i][j], not both");
    matrix.emplace_back("omega", fmt17(real("model.omega", omega)));
    matrix.emplace_back("theta", fmt17(real("model.theta", theta)));
    try {
      return ErasureModel::from_pairs(matrix);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }

  void check_all_used(const std::string& command) const {
    std::string unknown;
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw ConfigError("command '" + command + "' does not use: " + unknown);
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

struct Row {
  std::vector<std::pair<std::string, double>> cols;
  std::string strategy;  // empty for commands that mix strategies
  ComplexVector state;   // optimal input, iss only
};

Row from_report(const ProtocolReport& rep) {
  Row row;
  row.cols.emplace_back("rate", rep.rate);
  for (const auto& [k, v] : rep.params) row.cols.emplace_back(k, v);
  row.strategy = rep.strategy;
  return row;
}

struct Context {
  double tol = 1e-10;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::size_t point = 0;
};

using CommandFn = std::function<Row(Params&, const Context&)>;

Row run_fig2(Params& p, const Context& ctx) {
  const double gmax = p.real("fig2.gamma_max", 1.0);
  const double ratio = p.real("fig2.gamma_ratio", 1.0);
  if (!(gmax > 0.0)) throw ConfigError("fig2.gamma_max must be positive");
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("fig2.gamma_ratio must lie in [0, 1]");
  std::vector<int> ent;
  std::stringstream list(p.text("fig2.ent_N", "4,8"));
  for (std::string item; std::getline(list, item, ',');) {
    item = trim(item);
    if (!item.empty()) ent.push_back(static_cast<int>(parse_integer("fig2.ent_N", item)));
  }
  const double g1 = gmax, g2 = ratio * gmax;
  Row row;
  row.cols.emplace_back("prod", product_bound_sigma_z(g1, g2).rate);
  row.cols.emplace_back("cd", cd_sigma_z_strategy1(g1, g2).rate);
  row.cols.emplace_back("ult", ultimate_sigma_z(g1, g2).value);
  for (int n : ent) row.cols.emplace_back("ent_N" + std::to_string(n), iss_rate(n, g1, g2, ctx.tol).report.rate);
  return row;
}

Row run_fig3(Params& p, const Context&) {
  const double gamma = p.real("fig3.gamma", 1.0);
  const double omega = p.real("fig3.omega", 0.1);
  const int n = p.integer("fig3.N", 1);
  const double t = p.real("fig3.T", 1.0);
  if (n < 1) throw ConfigError("fig3.N must be positive");
  if (!(t > 0.0)) throw ConfigError("fig3.T must be positive");
  Eigen::MatrixXd g(2, 1);
  g << 0.0, gamma;
  const UltimateBound ult = ultimate_sigma_x(g);
  Row row;
  row.cols.emplace_back("cd", cd_sigma_x(gamma, omega, kInfiniteTau).rate);
  // Heisenberg-limited QFI per unit T when available, otherwise rate times N.
  row.cols.emplace_back("ult", ult.heisenberg ? ult.value * n * n * t : ult.value * n);
  row.cols.emplace_back("heisenberg", ult.heisenberg ? 1.0 : 0.0);
  return row;
}

Row run_bounds(Params& p, const Context&) {
  const ErasureModel model = p.model(1.0, 1.0, 1.0, 0.0);
  const double gmax = model.gamma().size() ? model.gamma().maxCoeff() : 0.0;
  if (!(gmax > 0.0)) throw ConfigError("bounds: the model has no decay");
  const NumericUltimate ult = ultimate_numeric(model);
  const Optimum1d prod =
      maximize_positive([&](double t) { return ecqfi(kraus(model, t)) / t; }, 1e-3 / gmax, 50.0 / gmax, 30, 1e-8);
  Row row;
  row.cols.emplace_back("prod", prod.value);
  row.cols.emplace_back("prod_t_opt", prod.x);
  row.cols.emplace_back("ult", ult.bound.value);
  row.cols.emplace_back("ult_lower", ult.bound.lower);
  row.cols.emplace_back("ult_upper", ult.bound.upper);
  row.cols.emplace_back("heisenberg", ult.bound.heisenberg ? 1.0 : 0.0);
  return row;
}

Row run_cd(Params& p, const Context&) {
  const std::string kind = p.text("cd.kind", "strategy1");
  if (kind == "strategy1") {
    const double g1 = p.real("model.gamma1", 1.0), g2 = p.real("model.gamma2", 1.0);
    return from_report(cd_sigma_z_strategy1(g1, g2));
  }
  const double gamma = p.real("cd.gamma", 1.0);
  if (kind == "strategy2") return from_report(cd_sigma_z_strategy2(gamma));
  if (kind == "sigma_x") return from_report(cd_sigma_x(gamma, p.real("cd.omega", 0.1), p.real("cd.tau", kInfiniteTau)));
  if (kind == "ghz") return from_report(cd_ghz(p.integer("cd.N", 1), gamma));
  if (kind == "two_qubit") return from_report(cd_two_qubit(gamma));
  throw ConfigError("cd.kind must be one of strategy1, strategy2, sigma_x, ghz, two_qubit (got '" + kind + "')");
}

Row run_qec(Params& p, const Context&) {
  CodeLabel label;
  try {
    label = code_label_from_name(p.text("qec.code", "hl"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const double t = p.real("qec.T", 1.0);
  if (label == CodeLabel::thermal_conversion)
    return from_report(
        thermal_conversion(p.real("model.gamma1", 1.0), p.real("model.gamma2", 1.0), p.integer("qec.N", 2)).report);
  // The codes target the sigma_x generator; the HL default is the noiseless-|2> case.
  const bool hl = label == CodeLabel::hl_plus_minus;
  const ErasureModel model = p.model(hl ? 1.0 : 0.5, hl ? 0.0 : 1.0, 1.0, 0.5 * kPi);
  switch (label) {
    case CodeLabel::hl_plus_minus: {
      const int sites = p.integer("qec.sites", 2);
      return from_report(qec_qfi(hl_code(sites, model.k()), model, p.integer("qec.N", sites), t));
    }
    case CodeLabel::zero_signal:
      if (p.integer("qec.scan", 0) != 0) return from_report(zero_signal_scan(model));
      return from_report(
          qec_qfi(zero_signal_code(model, p.real("qec.epsilon", kDefaultCodeEpsilon)), model, p.integer("qec.N", 1), t));
    case CodeLabel::dephasing_ancilla:
      return from_report(qec_qfi(dephasing_ancilla_code(model.k()), model, p.integer("qec.N", 1), t));
    default:
      break;
  }
  throw ConfigError("qec: unsupported code");
}

Row run_iss(Params& p, const Context& ctx) {
  const int n = p.integer("iss.N", 4);
  const double g1 = p.real("model.gamma1", 1.0), g2 = p.real("model.gamma2", 1.0);
  p.text("iss.states", "");  // consumed by the caller
  const IssRate r = iss_rate(n, g1, g2, ctx.tol);
  Row row = from_report(r.report);
  row.cols.emplace_back("converged", r.best.converged ? 1.0 : 0.0);
  row.state = r.best.state;
  return row;
}

Row run_squeeze(Params& p, const Context&) {
  const int n = p.integer("squeeze.N", kMaxSqueezeN);
  const double g1 = p.real("model.gamma1", 1.0), g2 = p.real("model.gamma2", 1.0);
  const bool exact = p.integer("squeeze.exact", 1) != 0;
  const ProtocolReport asym = squeezed_rate(n, g1, g2);
  if (!exact) return from_report(asym);
  Row row = from_report(squeezed_rate_exact(n, g1, g2));
  row.cols.emplace_back("asymptotic", asym.rate);
  row.cols.emplace_back("fraction", row.cols.front().second / asym.rate);
  return row;
}

Row run_montecarlo(Params& p, const Context& ctx) {
  const std::string kind = p.text("mc.kind", "strategy1");
  const double total = p.real("mc.total_time", 1e5);
  const int trajectories = p.integer("mc.trajectories", 16);
  if (!(total > 0.0) || trajectories < 1) throw ConfigError("mc.total_time and mc.trajectories must be positive");
  std::optional<double> analytic;
  ErasureModel model;
  CdStrategy strategy;
  if (kind == "strategy1" || kind == "lapses") {
    const double g1 = p.real("model.gamma1", 1.0), g2 = p.real("model.gamma2", 1.0);
    model = ErasureModel::single(g1, g2, p.real("model.omega", 1.0), 0.0);
    if (kind == "strategy1") {
      const double tau = p.has("mc.tau") ? p.real("mc.tau", 1.0) : cd_sigma_z_strategy1(g1, g2).param("tau_opt");
      strategy = CdStrategy::after_reset(tau, p.real("mc.p", cd_strategy1_p_opt(g1, g2, tau)));
      analytic = renewal_after_reset(model, strategy.input, tau).rate();
    } else {
      const double tau = p.real("mc.tau", 1.0), prob = p.real("mc.p", 0.5);
      strategy = CdStrategy::lapses(tau, prob);
      if (g1 == g2 && prob == 0.5) analytic = cd_strategy2_rate(g1, tau);
    }
  } else if (kind == "sigma_x") {
    const double gamma = p.real("mc.gamma", 1.0), omega = p.real("mc.omega", 0.2);
    const double tau = p.real("mc.tau", kInfiniteTau);
    model = ErasureModel::single(0.0, gamma, omega, 0.5 * kPi);
    strategy = CdStrategy::decay_time(tau);
    analytic = cd_sigma_x(gamma, omega, tau).rate;
  } else {
    throw ConfigError("mc.kind must be one of strategy1, lapses, sigma_x (got '" + kind + "')");
  }
  const CycleStats s = monte_carlo_cd(model, strategy, total, trajectories, ctx.seed + ctx.point, ctx.jobs);
  Row row;
  row.strategy = "cd";
  row.cols.emplace_back("rate", s.rate);
  row.cols.emplace_back("stderr", s.rate_stderr);
  if (analytic) {
    row.cols.emplace_back("analytic", *analytic);
    row.cols.emplace_back("z_score", s.rate_stderr > 0.0 ? (s.rate - *analytic) / s.rate_stderr : 0.0);
  }
  row.cols.emplace_back("cycles", static_cast<double>(s.cycles));
  row.cols.emplace_back("mean_cycle_time", s.mean_cycle_time);
  row.cols.emplace_back("mean_cycle_fi", s.mean_cycle_fi);
  row.cols.emplace_back("insufficient", s.insufficient ? 1.0 : 0.0);
  return row;
}

struct CommandSpec {
  std::string name;
  std::string description;
  CommandFn fn;
  std::optional<SweepAxis> default_sweep;
  bool parallel_points = true;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> table = [] {
    SweepAxis ratio{"fig2.gamma_ratio", 0.0, 1.0, 50, true};
    SweepAxis qubits{"fig3.N", 1.0, 8.0, 8, false};
    return std::vector<CommandSpec>{
        {"fig2", "sigma_z rates vs Gamma_min/Gamma_max: prod, cd, ult, ent_N*", run_fig2, ratio},
        {"fig3", "sigma_x decay-time detection vs Heisenberg marker over N", run_fig3, qubits},
        {"bounds", "single-use and asymptotic bounds for a model", run_bounds, std::nullopt},
        {"cd", "continuous-detection rates (cd.kind)", run_cd, std::nullopt},
        {"qec", "error-corrected rates for a code (qec.code)", run_qec, std::nullopt},
        {"iss", "finite-N entangled rate via iterative see-saw", run_iss, std::nullopt},
        {"squeeze", "spin-squeezed rate, exact at finite N and asymptotic", run_squeeze, std::nullopt},
        {"montecarlo", "trajectory simulation of continuous detection", run_montecarlo, std::nullopt, false},
        {"list", "print this command list", nullptr, std::nullopt},
    };
  }();
  return table;
}

const CommandSpec* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

std::string unknown_command_message(const std::string& name) {
  std::string msg = "unknown command '" + name + "'";
  const std::string s = suggest_command(name);
  if (!s.empty()) msg += "; did you mean '" + s + "'?";
  return msg;
}

// Runs f(i) for i in [0, n) on `jobs` threads. The first failure by index is
// rethrown; later points are skipped once a failure is seen.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      if (failed) break;
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<double> SweepAxis::values() const {
  if (points < 1) throw ConfigError("sweep.points must be at least 1");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError("sweep bounds must be finite");
  if (points == 1) return {start};
  std::vector<double> v(points);
  if (!log_scale) {
    for (int i = 0; i < points; ++i) v[i] = start + (stop - start) * i / (points - 1);
  } else {
    const bool zero_start = start == 0.0;
    const double a = zero_start ? log_floor : start;
    if (!(a > 0.0) || !(stop > 0.0)) throw ConfigError("log sweeps need positive bounds (a zero start is allowed)");
    const int first = zero_start ? 1 : 0;
    const int count = points - first;
    if (zero_start) v[0] = 0.0;
    for (int i = 0; i < count; ++i)
      v[first + i] = count == 1 ? stop : std::exp(std::log(a) + (std::log(stop) - std::log(a)) * i / (count - 1));
  }
  v.back() = stop;
  return v;
}

std::string SweepAxis::column() const {
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(dot + 1);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::map<std::string, std::string> sweep;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (key == "command") {
      cfg.command = value;
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "seed") {
      const long s = parse_integer(key, value);
      if (s < 0) throw ConfigError("seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "tol") {
      cfg.tol = parse_real(key, value);
      if (!(*cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(parse_integer(key, value));
      if (cfg.jobs < 0) throw ConfigError("jobs must be nonnegative");
    } else if (key.rfind("sweep.", 0) == 0) {
      sweep[key] = value;
    } else if (key.find('.') != std::string::npos) {
      cfg.values[key] = value;
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!sweep.empty()) {
    SweepAxis axis;
    for (const auto& [key, value] : sweep) {
      if (key == "sweep.name") {
        axis.name = value;
      } else if (key == "sweep.start") {
        axis.start = parse_real(key, value);
      } else if (key == "sweep.stop") {
        axis.stop = parse_real(key, value);
      } else if (key == "sweep.points") {
        axis.points = static_cast<int>(parse_integer(key, value));
      } else if (key == "sweep.scale") {
        if (value != "linear" && value != "log") throw ConfigError("sweep.scale must be linear or log");
        axis.log_scale = value == "log";
      } else if (key == "sweep.floor") {
        axis.log_floor = parse_real(key, value);
      } else {
        throw ConfigError("unknown sweep key '" + key + "'");
      }
    }
    if (axis.name.empty() || axis.name.find('.') == std::string::npos)
      throw ConfigError("sweep.name must name a section key such as iss.N");
    if (!sweep.count("sweep.start") || !sweep.count("sweep.stop")) throw ConfigError("sweep needs start and stop");
    if (!sweep.count("sweep.points")) axis.points = axis.start == axis.stop ? 1 : 2;
    axis.values();  // validates
    cfg.sweep = axis;
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

const std::vector<std::pair<std::string, std::string>>& command_table() {
  static const std::vector<std::pair<std::string, std::string>> table = [] {
    std::vector<std::pair<std::string, std::string>> t;
    for (const auto& c : commands()) t.emplace_back(c.name, c.description);
    return t;
  }();
  return table;
}

std::string list_commands() {
  std::string out;
  for (const auto& [name, desc] : command_table()) {
    out += "  " + name;
    out.append(name.size() < 12 ? 12 - name.size() : 1, ' ');
    out += desc + "\n";
  }
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest_command(const std::string& name) {
  std::string best;
  std::size_t best_d = 4;
  for (const auto& [cmd, desc] : command_table()) {
    const std::size_t d = edit_distance(name, cmd);
    if (d < best_d) {
      best_d = d;
      best = cmd;
    }
  }
  return best;
}

std::string run_to_csv(const RunConfig& config) {
  const CommandSpec* spec = find_command(config.command);
  if (!spec) throw ConfigError(unknown_command_message(config.command));
  if (!spec->fn) return list_commands();

  // The built-in axis applies only when its key is left open.
  std::optional<SweepAxis> sweep = config.sweep;
  if (!sweep && spec->default_sweep && !config.values.count(spec->default_sweep->name)) sweep = spec->default_sweep;
  if (config.sweep && config.values.count(config.sweep->name))
    throw ConfigError("key '" + config.sweep->name + "' is both set and swept");
  const std::vector<double> points = sweep ? sweep->values() : std::vector<double>{0.0};
  Context base;
  base.tol = config.tol.value_or(1e-10);
  base.seed = config.seed;
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int jobs = config.jobs > 0 ? config.jobs : hw;

  std::vector<Row> rows(points.size());
  auto run_point = [&](std::size_t i, int inner_jobs) {
    std::map<std::string, std::string> values = config.values;
    if (sweep) values[sweep->name] = fmt17(points[i]);
    Params params(values);
    Context ctx = base;
    ctx.point = i;
    ctx.jobs = inner_jobs;
    Row row = spec->fn(params, ctx);
    params.check_all_used(spec->name);
    rows[i] = std::move(row);
  };
  if (spec->parallel_points) {
    parallel_for(points.size(), jobs, [&](std::size_t i) { run_point(i, 1); });
  } else {
    for (std::size_t i = 0; i < points.size(); ++i) run_point(i, jobs);
  }

  // Shared header; every row must carry the same columns.
  std::string out;
  if (sweep) out += sweep->column() + ",";
  const Row& first = rows.front();
  for (std::size_t c = 0; c < first.cols.size(); ++c) out += (c ? "," : "") + first.cols[c].first;
  if (!first.strategy.empty()) out += ",strategy";
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (r.cols.size() != first.cols.size() || r.strategy.empty() != first.strategy.empty())
      throw NumericError("sweep point " + std::to_string(i) + " produced different columns than point 0");
    if (sweep) out += fmt17(points[i]) + ",";
    for (std::size_t c = 0; c < r.cols.size(); ++c) {
      if (r.cols[c].first != first.cols[c].first)
        throw NumericError("sweep point " + std::to_string(i) + " produced different columns than point 0");
      if (!std::isfinite(r.cols[c].second))
        throw NumericError(spec->name + ": non-finite " + r.cols[c].first + " at sweep point " + std::to_string(i));
      out += (c ? "," : "") + fmt17(r.cols[c].second);
    }
    if (!r.strategy.empty()) out += "," + r.strategy;
    out += "\n";
  }

  const auto states = config.values.find("iss.states");
  if (states != config.values.end() && !states->second.empty()) {
    std::string text = "point,n1,re,im,prob\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::istringstream lines(dicke_amplitudes_csv(rows[i].state));
      std::string line;
      std::getline(lines, line);  // header
      while (std::getline(lines, line)) text += std::to_string(i) + "," + line + "\n";
    }
    std::ofstream f(states->second, std::ios::binary);
    if (!f) throw ConfigError("cannot write iss.states file '" + states->second + "'");
    f << text;
  }
  return out;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const std::string csv = run_to_csv(config);
    if (config.output.empty()) {
      out << csv;
    } else {
      std::ofstream f(config.output, std::ios::binary);
      if (!f) throw ConfigError("cannot write output file '" + config.output + "'");
      f << csv;
      if (!f) throw ConfigError("write failed for '" + config.output + "'");
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  const std::string usage = std::string("usage: erasure_cli <command> [--config PATH] [--out PATH] [--jobs N] "
                                        "[--seed N] [--tol X] [--set key=value]...\ncommands:\n") +
                            list_commands();
  if (argc <= 1) {
    err << usage;
    return kExitUsage;
  }

  CLI::App app{"Erasure-qubit metrology calculations"};
  std::string command, config_path, out_path;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::vector<std::string> sets;
  app.add_option("command", command, "command to run (see list)");
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--out", out_path, "CSV output path (default: standard output)");
  app.add_option("--jobs", jobs, "worker threads (default: available parallelism)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--tol", tol, "convergence tolerance override")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "extra key=value setting, applied after the config file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << "commands:\n" << list_commands();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    RunConfig cfg;
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    for (const auto& s : sets) {
      if (s.find('=') == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      text += "\n" + s;
    }
    cfg = parse_config_text(text);
    if (!command.empty()) {
      if (!cfg.command.empty() && cfg.command != command)
        throw ConfigError("command '" + command + "' conflicts with config command '" + cfg.command + "'");
      cfg.command = command;
    }
    if (cfg.command.empty()) {
      err << usage;
      return kExitUsage;
    }
    if (!find_command(cfg.command)) throw ConfigError(unknown_command_message(cfg.command));
    if (!out_path.empty()) cfg.output = out_path;
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tol = *tol;
    return run(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace erasure
