// mdstop command-line tool.
//
// Subcommands:
//   run       one stopped experiment, JSON record on stdout
//   trace     per-batch series (means, variance hierarchy, criterion)
//   evaluate  (epsilon, delta) grid -> reliability/complexity CSV + summary
//   verify    built-in verification suite against independent references
#include "mdstop/harness.hpp"
#include "mdstop/normal.hpp"
#include "mdstop/process.hpp"
#include "mdstop/rng.hpp"
#include "mdstop/schedule.hpp"
#include "mdstop/stopping.hpp"
#include "mdstop/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct CliOptions {
  std::string model = "arch1:0.03:0.3:6";
  std::string schedule = "poly:5";
  double epsilon = 0.05;
  double delta = 0.05;
  std::string variance = "empirical";
  std::string inflation = "inv_t";
  std::uint64_t seed = 1;
  std::uint64_t runs = 5000;
  unsigned ell = 5;
  std::string grid_eps = "0.001:0.1";
  std::string grid_delta = "0.001:0.1";
  std::uint64_t grid_points = 10;
  std::uint64_t t_max = 64;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
};

const char* kConfigKeys[] = {"model",    "schedule",   "epsilon", "delta",
                             "variance", "inflation",  "seed",    "runs",
                             "ell",      "grid_eps",   "grid_delta",
                             "grid_points", "t_max",   "out",     "format",
                             "threads"};

void load_config_file(const std::string& path, CliOptions& o) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j = json::parse(in);
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kConfigKeys) known = known || key == k;
    if (!known) throw std::runtime_error("config file: unknown key '" + key + "'");
    if (key == "model") o.model = value.get<std::string>();
    else if (key == "schedule") o.schedule = value.get<std::string>();
    else if (key == "epsilon") o.epsilon = value.get<double>();
    else if (key == "delta") o.delta = value.get<double>();
    else if (key == "variance") o.variance = value.get<std::string>();
    else if (key == "inflation") o.inflation = value.get<std::string>();
    else if (key == "seed") o.seed = value.get<std::uint64_t>();
    else if (key == "runs") o.runs = value.get<std::uint64_t>();
    else if (key == "ell") o.ell = value.get<unsigned>();
    else if (key == "grid_eps") o.grid_eps = value.get<std::string>();
    else if (key == "grid_delta") o.grid_delta = value.get<std::string>();
    else if (key == "grid_points") o.grid_points = value.get<std::uint64_t>();
    else if (key == "t_max") o.t_max = value.get<std::uint64_t>();
    else if (key == "out") o.out = value.get<std::string>();
    else if (key == "format") o.format = value.get<std::string>();
    else if (key == "threads") o.threads = value.get<unsigned>();
  }
}

ordered_json effective_config(const CliOptions& o) {
  ordered_json j;
  j["model"] = o.model;
  j["schedule"] = o.schedule;
  j["epsilon"] = o.epsilon;
  j["delta"] = o.delta;
  j["variance"] = o.variance;
  j["inflation"] = o.inflation;
  j["seed"] = o.seed;
  j["runs"] = o.runs;
  j["ell"] = o.ell;
  j["grid_eps"] = o.grid_eps;
  j["grid_delta"] = o.grid_delta;
  j["grid_points"] = o.grid_points;
  j["t_max"] = o.t_max;
  j["out"] = o.out;
  j["format"] = o.format;
  j["threads"] = o.threads;
  return j;
}

mdstop::VarianceKind parse_variance(const std::string& s) {
  if (s == "empirical") return mdstop::VarianceKind::empirical;
  if (s == "conditional") return mdstop::VarianceKind::conditional;
  if (s == "theoretical") return mdstop::VarianceKind::theoretical;
  throw std::runtime_error("unknown variance kind '" + s +
                           "' (empirical|conditional|theoretical)");
}

mdstop::Inflation parse_inflation(const std::string& s) {
  if (s == "inv_t") return mdstop::Inflation::inv_t();
  if (s == "none") return mdstop::Inflation::none();
  throw std::runtime_error("unknown inflation kind '" + s + "' (inv_t|none)");
}

std::pair<double, double> parse_range(const std::string& s, const char* what) {
  const std::size_t colon = s.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error(std::string(what) + " must look like lo:hi");
  return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

mdstop::StoppingConfig make_stopping_config(const CliOptions& o) {
  mdstop::StoppingConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.delta = o.delta;
  cfg.variance_kind = parse_variance(o.variance);
  cfg.inflation = parse_inflation(o.inflation);
  cfg.t_max = o.t_max;
  cfg.validate();
  return cfg;
}

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------

int cmd_run(const CliOptions& o) {
  const mdstop::ModelFactory factory = mdstop::parse_model(o.model);
  const mdstop::BatchSchedule schedule = mdstop::BatchSchedule::parse(o.schedule);
  const mdstop::StoppingConfig cfg = make_stopping_config(o);

  const auto purpose = static_cast<std::uint32_t>(mdstop::StreamPurpose::single_run);
  mdstop::RngStream primary(o.seed, {purpose, 0, 0, false});
  mdstop::RngStream branch(o.seed, {purpose, 0, 0, true});
  auto model = factory.make();
  const mdstop::StoppingOutcome res =
      mdstop::run_stopping(*model, schedule, cfg, primary, branch);

  ordered_json j;
  j["tau"] = res.tau;
  j["mu_star"] = res.mu_star;
  j["mu_at_stop"] = res.mu_at_stop;
  j["v_at_stop"] = number_or_null(res.v_at_stop);
  j["criterion"] = number_or_null(res.criterion_at_stop);
  j["total_samples"] = res.total_samples;
  j["hit_cap"] = res.hit_cap;
  const std::string text = j.dump() + "\n";
  std::cout << text;
  if (!o.out.empty()) write_text(o.out, text);
  return 0;
}

int cmd_trace(const CliOptions& o) {
  if (o.format != "csv" && o.format != "json")
    throw std::runtime_error("trace: format must be csv or json");
  const mdstop::ModelFactory factory = mdstop::parse_model(o.model);
  const mdstop::BatchSchedule schedule = mdstop::BatchSchedule::parse(o.schedule);
  const mdstop::StoppingConfig cfg = make_stopping_config(o);

  const auto purpose = static_cast<std::uint32_t>(mdstop::StreamPurpose::trace);
  mdstop::RngStream primary(o.seed, {purpose, 0, 0, false});
  auto model = factory.make();
  const std::vector<mdstop::TraceRow> rows =
      mdstop::trace_batches(*model, schedule, cfg, primary, o.t_max);

  std::string text;
  if (o.format == "csv") {
    auto cell = [](const std::optional<double>& v) {
      if (!v) return std::string();
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      return std::string(buf);
    };
    std::ostringstream os;
    os << "t,batch_size,mu,v0sq,v1sq,v2sq,criterion\n";
    for (const auto& r : rows) {
      char mu[32];
      std::snprintf(mu, sizeof mu, "%.17g", r.mean);
      os << r.t << ',' << r.batch_size << ',' << mu << ',' << cell(r.v0_sq) << ','
         << cell(r.v1_sq) << ',' << cell(r.v2_sq) << ',' << cell(r.criterion) << '\n';
    }
    text = os.str();
  } else if (o.format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json row;
      row["t"] = r.t;
      row["batch_size"] = r.batch_size;
      row["mu"] = r.mean;
      row["v0sq"] = r.v0_sq ? json(*r.v0_sq) : json(nullptr);
      row["v1sq"] = r.v1_sq ? json(*r.v1_sq) : json(nullptr);
      row["v2sq"] = r.v2_sq ? json(*r.v2_sq) : json(nullptr);
      row["criterion"] = r.criterion ? json(*r.criterion) : json(nullptr);
      arr.push_back(row);
    }
    text = arr.dump(2) + "\n";
  }
  if (!o.out.empty())
    write_text(o.out, text);
  else
    std::cout << text;
  return 0;
}

int cmd_evaluate(const CliOptions& o) {
  const mdstop::ModelFactory factory = mdstop::parse_model(o.model);
  const mdstop::BatchSchedule schedule = mdstop::BatchSchedule::parse(o.schedule);
  mdstop::StoppingConfig base = make_stopping_config(o);

  const auto [eps_lo, eps_hi] = parse_range(o.grid_eps, "--grid-eps");
  const auto [del_lo, del_hi] = parse_range(o.grid_delta, "--grid-delta");
  const mdstop::EvalGrid grid =
      mdstop::build_grid(eps_lo, eps_hi, del_lo, del_hi, o.grid_points);

  const mdstop::GridReport report = mdstop::evaluate(
      factory, schedule, grid, base, o.runs, o.ell, o.seed, o.threads);

  const std::string base_path = o.out.empty() ? "grid_report" : o.out;
  {
    std::ostringstream os;
    mdstop::write_cells_csv(report, os);
    write_text(base_path + ".csv", os.str());
  }
  {
    std::ostringstream os;
    mdstop::write_summary_json(report, os);
    write_text(base_path + ".summary.json", os.str());
  }

  std::printf("%-18s %14s %14s %14s\n", "", "Mean", "Min", "Max");
  std::printf("%-18s %14.6g %14.6g %14.6g\n", "Reliability (R)",
              report.summary.reliability.mean, report.summary.reliability.min,
              report.summary.reliability.max);
  std::printf("%-18s %14.6g %14.6g %14.6g\n", "Complexity (CM)",
              report.summary.complexity.mean, report.summary.complexity.min,
              report.summary.complexity.max);
  std::printf("wrote %s.csv and %s.summary.json\n", base_path.c_str(), base_path.c_str());
  return 0;
}

int cmd_verify(const CliOptions& o) {
  const std::vector<mdstop::VerifyCheck> checks = mdstop::run_verification(o.seed);
  for (const auto& c : checks) {
    const char* tag = !c.gating ? "info" : (c.pass ? "PASS" : "FAIL");
    std::printf("[%s] %-36s %s\n", tag, c.name.c_str(), c.detail.c_str());
  }
  const bool ok = mdstop::verification_passed(checks);
  std::printf("%s\n", ok ? "verification passed" : "verification FAILED");
  return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential stopping rules for batched Monte Carlo estimation"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string config_file;
  std::string emit_config;

  // --config is applied before flag parsing so explicit flags override it.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) config_file = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) config_file = arg.substr(9);
  }
  try {
    if (!config_file.empty()) load_config_file(config_file, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--model", opts.model, "Model spec (iid:..., arch1:..., cv:...)");
    cmd->add_option("--schedule", opts.schedule, "Batch schedule (poly:5 or explicit:...)");
    cmd->add_option("--epsilon", opts.epsilon, "Precision epsilon > 0");
    cmd->add_option("--delta", opts.delta, "Error probability in (0,1)");
    cmd->add_option("--variance", opts.variance,
                    "Variance estimate: empirical|conditional|theoretical");
    cmd->add_option("--inflation", opts.inflation, "Inflation a(t): inv_t|none");
    cmd->add_option("--seed", opts.seed, "Base seed");
    cmd->add_option("--t-max", opts.t_max, "Batch cap (doubles as trace horizon)");
    cmd->add_option("--out", opts.out, "Output path");
    cmd->add_option("--format", opts.format, "Output format where applicable: csv|json");
    cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware)");
    cmd->add_option("--config", config_file, "JSON config file (flags override it)");
    cmd->add_option("--emit-config", emit_config,
                    "Write the effective merged config to this path");
  };

  CLI::App* run = app.add_subcommand("run", "One stopped experiment");
  add_common(run);
  CLI::App* trace = app.add_subcommand("trace", "Per-batch series over a fixed horizon");
  add_common(trace);
  CLI::App* evaluate = app.add_subcommand("evaluate", "Reliability/complexity grid");
  add_common(evaluate);
  evaluate->add_option("--runs", opts.runs, "Independent runs per grid cell");
  evaluate->add_option("--ell", opts.ell, "Complexity exponent");
  evaluate->add_option("--grid-eps", opts.grid_eps, "Epsilon range lo:hi");
  evaluate->add_option("--grid-delta", opts.grid_delta, "Delta range lo:hi");
  evaluate->add_option("--grid-points", opts.grid_points, "Points per grid axis");
  CLI::App* verify = app.add_subcommand("verify", "Verification suite");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!emit_config.empty()) write_text(emit_config, effective_config(opts).dump(2) + "\n");
    if (run->parsed()) return cmd_run(opts);
    if (trace->parsed()) return cmd_trace(opts);
    if (evaluate->parsed()) return cmd_evaluate(opts);
    if (verify->parsed()) return cmd_verify(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
