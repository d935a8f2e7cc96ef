// mdlp: run experiments, check bounds on recorded runs, summarize records.
//
// Exit status: 0 when every bound passes, 2 on a violation, 1 on error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mdlp/config.hpp"
#include "mdlp/errors.hpp"
#include "mdlp/harness.hpp"
#include "mdlp/kernels.hpp"
#include "mdlp/report.hpp"
#include "mdlp/scenarios.hpp"

namespace fs = std::filesystem;
using namespace mdlp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

ExperimentConfig resolve_config(const std::string& what) {
  if (fs::is_regular_file(what)) return load_config(what);
  if (find_scenario(what)) return scenario_config(what);
  throw ConfigError(what, "no such file or built-in scenario");
}

void apply_jobs(std::optional<int> flag, const ExperimentConfig& cfg) {
  int jobs = flag.value_or(cfg.jobs);
  if (jobs <= 0) {
    if (const char* env = std::getenv("MDLP_JOBS")) jobs = std::atoi(env);
  }
  kernels::set_threads(jobs);
}

void print_checks(const BoundReport& report, Format format) {
  if (format == Format::json) {
    std::cout << to_json(report).dump(2) << '\n';
    return;
  }
  for (const auto& c : report.checks) {
    std::cout << (c.verdict == Verdict::pass ? "PASS" : c.verdict == Verdict::fail ? "FAIL" : "SKIP") << "  "
              << c.predictor << "  " << c.bound << "  observed=" << format_double(c.observed);
    if (!c.exact) std::cout << " stderr=" << format_double(c.stderr_);
    std::cout << " limit=" << format_double(c.limit) << " margin=" << format_double(c.margin);
    if (!c.note.empty()) std::cout << "  (" << c.note << ')';
    std::cout << '\n';
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

int run_command(const std::string& what, std::optional<std::uint64_t> seed, const std::string& out_dir,
                std::optional<int> jobs, Format format) {
  ExperimentConfig cfg = resolve_config(what);
  if (seed) cfg.seed = *seed;
  apply_jobs(jobs, cfg);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::string records_name = cfg.output.records;
  if (format == Format::json && records_name == OutputConfig{}.records) records_name = "records.jsonl";
  const fs::path records_path = dir / records_name;
  std::ofstream records(records_path, std::ios::binary);
  if (!records) throw std::runtime_error(records_path.string() + ": cannot write");

  const RunHeader header = run_header(cfg);
  RecordWriter writer(records, format, header);
  RecordStats stats(header.predictors);
  stats.set_run_id(header.run_id);
  run_experiment(cfg, [&](const RunRow& r) {
    writer.write(r);
    stats.add(r);
  });
  records.close();
  if (!records) throw std::runtime_error(records_path.string() + ": write failed");

  const BoundReport bounds = check_bounds(stats, cfg);
  write_json_file(dir / cfg.output.summary, summarize(stats, cfg.checkpoints, &bounds, &cfg));
  if (cfg.is_rl()) {
    std::ofstream values(dir / cfg.output.values);
    write_values_csv(values, stats, cfg);
  }

  std::cerr << "run " << header.run_id << ": " << stats.rows() << " rows -> " << records_path.string() << '\n';
  print_checks(bounds, format);
  return bounds.all_pass() ? kExitOk : kExitViolation;
}

int check_command(const std::string& records, const std::string& config, std::optional<std::uint64_t> seed,
                  Format format) {
  ExperimentConfig cfg = resolve_config(config);
  if (seed) cfg.seed = *seed;
  const RecordStats stats = load_records(records);
  if (!stats.run_id().empty() && stats.run_id() != run_id(cfg)) {
    throw std::runtime_error("records come from run " + stats.run_id() + " but the config describes run " +
                             run_id(cfg));
  }
  const BoundReport bounds = check_bounds(stats, cfg);
  print_checks(bounds, format);
  return bounds.all_pass() ? kExitOk : kExitViolation;
}

int report_command(const std::string& records, const std::vector<std::size_t>& checkpoints, const std::string& out) {
  const RecordStats stats = load_records(records);
  std::vector<std::size_t> cps = checkpoints;
  if (cps.empty()) {
    const std::size_t L = stats.last_step();
    cps = {L / 20, L / 4, L};
  }
  const auto summary = summarize(stats, cps);
  if (out.empty()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    write_json_file(out, summary);
  }
  return kExitOk;
}

int list_command(const std::string& write_dir) {
  for (const auto& s : builtin_scenarios()) {
    std::cout << s.name << "  " << s.summary << '\n';
    if (!write_dir.empty()) {
      fs::create_directories(write_dir);
      std::ofstream out(fs::path(write_dir) / (s.name + ".yaml"));
      out << s.yaml;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MDL, Bayes and elimination predictors with a seeded experiment harness"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out_dir = ".";
  std::string format_name = "csv";

  auto* run = app.add_subcommand("run", "run a config file or built-in scenario");
  std::string run_target;
  run->add_option("config", run_target, "config file or scenario name")->required();
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "worker threads (default: MDLP_JOBS or all cores)");
  run->add_option("--format", format_name, "record format")->check(CLI::IsMember({"csv", "json"}));

  auto* check = app.add_subcommand("check", "check bounds on recorded rows");
  std::string check_records, check_config;
  check->add_option("records", check_records, "records file")->required();
  check->add_option("config", check_config, "config file or scenario name")->required();
  check->add_option("--seed", seed, "seed the records were produced with, if overridden");
  check->add_option("--format", format_name, "verdict format")->check(CLI::IsMember({"csv", "json"}));

  auto* report = app.add_subcommand("report", "summarize recorded rows");
  std::string report_records, report_out;
  std::vector<std::size_t> checkpoints;
  report->add_option("records", report_records, "records file")->required();
  report->add_option("--checkpoints", checkpoints, "steps at which to report median d_h");
  report->add_option("--out", report_out, "write the summary here instead of stdout");

  auto* list = app.add_subcommand("list-scenarios", "list built-in scenarios");
  std::string write_dir;
  list->add_option("--write", write_dir, "also write each scenario as DIR/<name>.yaml");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    const Format format = parse_format(format_name);
    if (*run) return run_command(run_target, seed, out_dir, jobs, format);
    if (*check) return check_command(check_records, check_config, seed, format);
    if (*report) return report_command(report_records, checkpoints, report_out);
    if (*list) return list_command(write_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
