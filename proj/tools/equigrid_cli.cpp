// Command-line front end: grids, estimates, sweeps, bounds and figure runs.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "equigrid/equigrid.hpp"

namespace {

using nlohmann::json;
using namespace equigrid;

enum ExitCode { kOk = 0, kConfigError = 2, kUnavailable = 3, kRuntimeError = 4 };

/// Raised when a metric has no oracle for the requested process.
struct Unavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat JSON object of option names to values, for --config.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || opt->count() == 0) continue;
      const auto& res = opt->results();
      j[opt->get_lnames().front()] = res.size() == 1 ? json(res.front()) : json(res);
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(text(v));
      } else if (value.is_object() || value.is_null()) {
        throw CLI::ConversionError("config key '" + key + "' must be a scalar or an array");
      } else {
        item.inputs.push_back(text(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct Options {
  std::string process = "bm";
  double rate = 1.0;
  std::optional<double> hurst;
  std::vector<std::string> families;
  std::vector<std::size_t> ns;
  std::vector<double> bs;
  std::vector<double> b_range;  // lo hi step
  double b0 = kDefaultB0;
  std::optional<std::size_t> replicas;
  std::optional<double> eps;
  double alpha = 0.05;
  double beta_bound = 0.0;
  double target_stderr = 0.0;
  std::size_t max_replicas = 20'000'000;
  std::size_t sup_draws = 10'000'000;
  std::size_t vectors = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  std::string output;
  std::string format;
  bool full = false;
  int figure = 0;
};

ProcessSpec make_process(const Options& o) {
  if (o.process == "bm") return ProcessSpec::bm();
  if (o.process == "bmjumps") return ProcessSpec::bm_jumps(o.rate);
  if (o.process == "ou") return ProcessSpec::ou();
  if (o.process == "fbm") {
    if (!o.hurst) throw std::invalid_argument("--hurst is required for --process fbm");
    return ProcessSpec::fbm(*o.hurst);
  }
  throw std::invalid_argument("unknown process: " + o.process);
}

std::vector<double> thresholds(const Options& o) {
  std::vector<double> out = o.bs;
  if (!o.b_range.empty()) {
    if (o.b_range.size() != 3) throw std::invalid_argument("--b-range takes LO HI STEP");
    const double lo = o.b_range[0], hi = o.b_range[1], step = o.b_range[2];
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("--b-range needs HI >= LO and STEP > 0");
    for (std::size_t i = 0;; ++i) {
      const double b = lo + step * static_cast<double>(i);
      if (b > hi + 1e-9 * step) break;
      out.push_back(b);
    }
  }
  for (double b : out)
    if (!std::isfinite(b)) throw std::invalid_argument("thresholds must be finite");
  return out;
}

double single_threshold(const Options& o) {
  const auto bs = thresholds(o);
  if (bs.size() != 1) throw std::invalid_argument("this command takes exactly one threshold (--b)");
  return bs.front();
}

std::size_t single_size(const Options& o, std::size_t fallback) {
  if (o.ns.empty()) return fallback;
  if (o.ns.size() != 1) throw std::invalid_argument("this command takes exactly one --n");
  return o.ns.front();
}

GridFamily single_family(const Options& o) {
  if (o.families.empty()) return GridFamily::ThresholdDependentBM;
  if (o.families.size() != 1) throw std::invalid_argument("this command takes exactly one --family");
  return grid_family_from_string(o.families.front());
}

json resolved_config(const std::string& command, const Options& o) {
  json j{{"command", command},
         {"process", o.process},
         {"rate", o.rate},
         {"hurst", o.hurst ? json(*o.hurst) : json(nullptr)},
         {"family", o.families},
         {"n", o.ns},
         {"b", thresholds(o)},
         {"b0", o.b0},
         {"replicas", o.replicas ? json(*o.replicas) : json(nullptr)},
         {"eps", o.eps ? json(*o.eps) : json(nullptr)},
         {"alpha", o.alpha},
         {"beta_bound", o.beta_bound},
         {"target_stderr", o.target_stderr},
         {"max_replicas", o.max_replicas},
         {"sup_draws", o.sup_draws},
         {"vectors", o.vectors},
         {"seed", o.seed},
         {"workers", o.workers},
         {"format", o.format},
         {"full", o.full}};
  if (command == "reproduce-figure") j["figure"] = o.figure;
  return j;
}

json sweep_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(r);
  return arr;
}

SweepConfig sweep_config(const Options& o, Metric metric) {
  SweepConfig cfg;
  cfg.process = make_process(o);
  cfg.metric = metric;
  if (!metric_supported(metric, cfg.process))
    throw Unavailable("beta requires an exact oracle for w(b); unavailable for " + cfg.process.name() +
                      " (use gamma-sweep)");
  if (!o.families.empty()) {
    cfg.families.clear();
    for (const auto& f : o.families) cfg.families.push_back(grid_family_from_string(f));
  }
  if (!o.ns.empty()) cfg.ns = o.ns;
  cfg.bs = thresholds(o);
  if (cfg.bs.empty()) throw std::invalid_argument("sweeps need --b or --b-range");
  cfg.b0 = o.b0;
  if (o.replicas) cfg.replicas = *o.replicas;
  cfg.target_stderr = o.target_stderr;
  cfg.max_replicas = o.max_replicas;
  cfg.sup_draws = o.sup_draws;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  return cfg;
}

struct Result {
  std::string body;       // file contents
  std::string extension;  // "csv" or "json"
  json summary = json::object();
};

Result run_grid(const Options& o) {
  const double b = single_threshold(o);
  const Grid g = make_grid(single_family(o), single_size(o, 100), b, make_process(o), o.b0);
  if (const auto issues = validate(g); !issues.empty()) throw std::runtime_error("invalid grid: " + issues.front());
  if (o.format == "csv") {
    std::ostringstream os;
    os << "k,t\n";
    for (std::size_t k = 0; k < g.size(); ++k) os << k + 1 << ',' << format_real(g[k]) << '\n';
    return {os.str(), "csv"};
  }
  return {json(g).dump(2) + "\n", "json"};
}

Result run_estimate(const Options& o) {
  const double b = single_threshold(o);
  const ProcessSpec p = make_process(o);
  const Grid g = make_grid(single_family(o), single_size(o, 100), b, p, o.b0);
  json extra = json::object();
  ReplicaBudget budget;
  if (o.eps) {
    const EfficiencyConfig eff{*o.eps, o.alpha, o.beta_bound};
    budget = ReplicaBudget::efficiency(g.size(), eff);
    extra = {{"epsilon", eff.epsilon},
             {"alpha", eff.alpha},
             {"beta_bound", eff.beta_bound},
             {"required_replicas", budget.replicas}};
  } else if (o.target_stderr > 0.0) {
    budget = ReplicaBudget::relative_stderr(o.target_stderr, o.max_replicas);
  } else {
    budget = ReplicaBudget::fixed(o.replicas.value_or(100'000));
  }
  const EstimateResult r = estimate_w(g, p, b, budget, o.seed, o.workers);
  if (o.format == "csv") {
    std::ostringstream os;
    os << "estimate,stderr,replicas,scaled_estimate,scaled_stderr,log_reference,b,n,seed\n"
       << format_real(r.estimate) << ',' << format_real(r.stderr_estimate()) << ',' << r.replicas << ','
       << format_real(r.scaled_estimate) << ',' << format_real(r.scaled_stderr()) << ','
       << format_real(r.log_reference) << ',' << format_real(b) << ',' << g.size() << ',' << o.seed << '\n';
    return {os.str(), "csv", {{"wall_time", r.wall_time}}};
  }
  json j = r;
  if (!extra.empty()) j["efficiency"] = extra;
  return {j.dump(2) + "\n", "json", {{"wall_time", r.wall_time}}};
}

Result rows_result(const std::vector<SweepRow>& rows, const Options& o) {
  for (const auto& r : rows)
    if (!r.error.empty()) throw std::runtime_error("sweep row " + std::to_string(r.index) + ": " + r.error);
  if (o.format == "json") return {sweep_json(rows).dump(2) + "\n", "json", {{"rows", rows.size()}}};
  std::ostringstream os;
  write_sweep_csv(os, rows);
  return {os.str(), "csv", {{"rows", rows.size()}}};
}

Result run_sweep(const Options& o, Metric metric) { return rows_result(sweep(sweep_config(o, metric)), o); }

Result run_bounds(const Options& o) {
  if (make_process(o).kind() != ProcessKind::BM) throw Unavailable("bounds are defined for Brownian motion only");
  const double b = single_threshold(o);
  const Grid g = make_grid(single_family(o), single_size(o, 100), b, ProcessSpec::bm(), o.b0);
  const BoundsReport r = orthant_bias_bounds(g, b, o.vectors, o.seed, o.workers);
  return {json(r).dump(2) + "\n", "json"};
}

Result run_figure_command(const Options& o) {
  const FigurePlan plan = figure_plan(o.figure, o.full, o.seed, o.workers);
  if (plan.sweeps.empty()) {
    std::ostringstream os;
    write_grid_evolution_csv(os, plan);
    return {os.str(), "csv", {{"description", plan.description}}};
  }
  Result r = rows_result(run_figure(plan), o);
  r.summary["description"] = plan.description;
  return r;
}

json versions() {
  return {{"equigrid", EQUIGRID_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION},
          {"compiler", __VERSION__}};
}

void write_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"type", kind}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-grid estimation of threshold-crossing probabilities"};
  app.set_version_flag("--version", EQUIGRID_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file of option values; command-line flags take precedence");
  app.allow_config_extras(false);

  Options o;
  app.add_option("--process", o.process, "bm, bmjumps, ou or fbm")
      ->check(CLI::IsMember({"bm", "bmjumps", "ou", "fbm"}));
  app.add_option("--rate", o.rate, "jump intensity for bmjumps")->check(CLI::NonNegativeNumber);
  app.add_option("--hurst", o.hurst, "Hurst parameter for fbm")->check(CLI::Range(0.0, 1.0));
  app.add_option("--family", o.families, "equidistant, threshold, equiprobable or optimal2 (repeatable in sweeps)")
      ->check(CLI::IsMember({"equidistant", "threshold", "equiprobable", "optimal2"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--n", o.ns, "grid size (repeatable in sweeps)")
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--b", o.bs, "threshold (repeatable in sweeps)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--b-range", o.b_range, "LO HI STEP thresholds for sweeps")->expected(3);
  app.add_option("--b0", o.b0, "threshold below which the threshold grid is equidistant")
      ->check(CLI::PositiveNumber);
  app.add_option("--replicas", o.replicas, "fixed replica count")->check(CLI::PositiveNumber);
  app.add_option("--eps", o.eps, "target relative accuracy; sets the replica count");
  app.add_option("--alpha", o.alpha, "allowed failure probability for --eps");
  app.add_option("--beta-bound", o.beta_bound, "known bound on the relative bias for --eps");
  app.add_option("--target-stderr", o.target_stderr,
                 "stop once the standard error reaches this (relative for estimate, metric units for sweeps)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--max-replicas", o.max_replicas, "cap for --target-stderr")->check(CLI::PositiveNumber);
  app.add_option("--sup-draws", o.sup_draws, "exact supremum draws per threshold (bmjumps beta)")
      ->check(CLI::PositiveNumber);
  app.add_option("--vectors", o.vectors, "Monte Carlo walks per orthant term (bounds)")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--workers", o.workers, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--output", o.output, "result file; the manifest goes next to it");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* grid_cmd = app.add_subcommand("grid", "print a grid");
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate w_T(b) on one grid");
  auto* bias_cmd = app.add_subcommand("bias-sweep", "relative bias over families, sizes and thresholds");
  auto* gamma_cmd = app.add_subcommand("gamma-sweep", "gamma over families, sizes and thresholds");
  auto* bounds_cmd = app.add_subcommand("bounds", "orthant lower and upper bounds on the relative bias (BM)");
  auto* figure_cmd = app.add_subcommand("reproduce-figure", "run the sweep behind figure N");
  figure_cmd->add_option("figure", o.figure, "figure number")->required()->check(CLI::Range(1, kFigureCount));
  figure_cmd->add_flag("--full", o.full, "tighter error bars at higher cost");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    const std::string extra = "INI was not able to parse ";
    if (msg.rfind(extra, 0) == 0) msg = "unknown config key: " + msg.substr(extra.size());
    write_error("config", msg);
    return kConfigError;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  const std::string command = cmd->get_name();
  const auto start = std::chrono::steady_clock::now();
  json manifest;
  Result result;
  try {
    if (o.format.empty()) {
      const bool tabular = command == "bias-sweep" || command == "gamma-sweep" || command == "reproduce-figure";
      o.format = tabular ? "csv" : "json";
    }
    if (o.eps) EfficiencyConfig{*o.eps, o.alpha, o.beta_bound}.check();
    (void)make_process(o);
    manifest["config"] = resolved_config(command, o);
    if (cmd == grid_cmd)
      result = run_grid(o);
    else if (cmd == estimate_cmd)
      result = run_estimate(o);
    else if (cmd == bias_cmd)
      result = run_sweep(o, Metric::Beta);
    else if (cmd == gamma_cmd)
      result = run_sweep(o, Metric::Gamma);
    else if (cmd == bounds_cmd)
      result = run_bounds(o);
    else
      result = run_figure_command(o);
  } catch (const Unavailable& e) {
    write_error("oracle-unavailable", e.what());
    return kUnavailable;
  } catch (const std::invalid_argument& e) {
    write_error("config", e.what());
    return kConfigError;
  } catch (const std::domain_error& e) {
    write_error("config", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    write_error("runtime", e.what());
    return kRuntimeError;
  }

  manifest["seed"] = o.seed;
  manifest["versions"] = versions();
  manifest["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["summary"] = result.summary;

  std::filesystem::path out = o.output;
  if (out.empty()) {
    if (const char* dir = std::getenv("EQUIGRID_OUTPUT_DIR"); dir && *dir) {
      std::string stem = command;
      if (command == "reproduce-figure") stem = "figure" + std::to_string(o.figure);
      out = std::filesystem::path(dir) / (stem + "." + result.extension);
    }
  }
  try {
    if (out.empty()) {
      std::cout << result.body;
      std::cerr << json{{"manifest", manifest}}.dump() << std::endl;
    } else {
      if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
      manifest["output"] = out.string();
      std::ofstream f(out, std::ios::binary);
      f << result.body;
      std::ofstream m(out.string() + ".manifest.json", std::ios::binary);
      m << manifest.dump(2) << '\n';
      if (!f || !m) throw std::runtime_error("could not write " + out.string());
    }
  } catch (const std::exception& e) {
    write_error("io", e.what());
    return kRuntimeError;
  }
  return kOk;
}
