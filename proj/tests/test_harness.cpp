#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mdlp/config.hpp"
#include "mdlp/errors.hpp"
#include "mdlp/harness.hpp"
#include "mdlp/report.hpp"
#include "mdlp/scenarios.hpp"

using namespace mdlp;

namespace {

ExperimentConfig from_yaml(const std::string& text) { return parse_config(yaml_to_json(text)); }

const char* const kSmall = R"(
name: small
seed: 7
trajectories: 4
length: 30
class:
  models:
    - {kind: bernoulli, theta: 0.3}
    - {kind: bernoulli, theta: 0.6}
    - {kind: markov, order: 1, rows: [[0.9, 0.1], [0.2, 0.8]]}
truth: 3
log_ratio_model: 1
predictors: [mdl, bayes, {kind: bayes-sampled}, map]
checkpoints: [10, 30]
)";

std::string to_csv(const ExperimentConfig& cfg, kernels::Exec exec = kernels::Exec::parallel) {
  std::ostringstream out;
  RecordWriter w(out, Format::csv, run_header(cfg));
  run_experiment(cfg, [&](const RunRow& r) { w.write(r); }, exec);
  return out.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

RecordStats stats_of(const std::string& csv) {
  std::istringstream in(csv);
  std::vector<std::string> columns;
  RecordStats stats;
  const auto header = read_records(in, [&](const RunRow& r) { stats.add(r); }, &columns);
  stats.set_names(header.predictors);
  stats.set_columns(columns);
  stats.set_run_id(header.run_id);
  return stats;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("row count and ordering") {
  const auto cfg = from_yaml(kSmall);
  const auto rows = run_experiment(cfg);
  CHECK(rows.size() == 4 * 31 * 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    CHECK(std::tie(a.trajectory, a.step, a.predictor) < std::tie(b.trajectory, b.step, b.predictor));
  }
  CHECK(count_lines(to_csv(cfg)) == 1 + rows.size());
}

TEST_CASE("single trajectory of length zero") {
  auto cfg = from_yaml(kSmall);
  cfg.trajectories = 1;
  cfg.length = 0;
  cfg.checkpoints = {0};
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.step == 0);
    CHECK(r.trajectory == 0);
  }
}

TEST_CASE("reruns and execution paths give identical bytes") {
  const auto cfg = from_yaml(kSmall);
  const std::string a = to_csv(cfg, kernels::Exec::serial);
  kernels::set_threads(4);
  const std::string b = to_csv(cfg, kernels::Exec::parallel);
  const std::string c = to_csv(cfg, kernels::Exec::parallel);
  kernels::set_threads(1);
  CHECK(a == b);
  CHECK(b == c);
  auto other = cfg;
  other.seed = 8;
  CHECK(to_csv(other) != a);
}

TEST_CASE("adding trajectories leaves earlier ones unchanged") {
  auto few = from_yaml(kSmall);
  auto more = few;
  more.trajectories = 7;
  const auto a = run_experiment(few);
  const auto b = run_experiment(more);
  REQUIRE(b.size() > a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].selected == b[i].selected);
    CHECK(a[i].errors == b[i].errors);
    CHECK(std::isnan(a[i].d_h) == std::isnan(b[i].d_h));
    if (!std::isnan(a[i].d_h)) CHECK(a[i].d_h == b[i].d_h);
  }
}

TEST_CASE("singleton class: zero distances pass every bound") {
  const auto cfg = from_yaml(R"(
trajectories: 5
length: 40
class:
  models: [{kind: bernoulli, theta: 0.35}]
predictors: [mdl, bayes, bayes-sampled]
checkpoints: [40]
)");
  const auto rows = run_experiment(cfg);
  for (const auto& r : rows) {
    if (!std::isnan(r.d_h)) CHECK(r.d_h == 0.0);
    if (r.selected) CHECK(*r.selected == 1);
  }
  const auto report = check_bounds(rows, cfg);
  CHECK_FALSE(report.checks.empty());
  for (const auto& c : report.checks) {
    if (c.bound == "sampled-errors") {
      // stochastic class: the error count bound does not apply
      CHECK(c.verdict == Verdict::skipped);
      continue;
    }
    CHECK(c.verdict == Verdict::pass);
    CHECK(c.observed == 0.0);
  }
  CHECK(report.all_pass());
}

TEST_CASE("deterministic class: elimination within its bound") {
  auto cfg = scenario_config("det-elimination");
  cfg.trajectories = 2;
  const auto report = check_bounds(run_experiment(cfg), cfg);
  REQUIRE(report.checks.size() >= 1);
  CHECK(report.checks[0].bound == "elimination-errors");
  CHECK(report.checks[0].observed <= report.checks[0].limit);
  CHECK(report.all_pass());
}

TEST_CASE("missing columns are reported") {
  const auto cfg = from_yaml(kSmall);
  RecordStats empty(std::vector<std::string>{"mdl"});
  empty.set_columns({"trajectory", "step", "predictor"});
  CHECK_THROWS_AS(check_bounds(empty, cfg), MissingColumn);

  RecordStats no_step(std::vector<std::string>{"mdl"});
  no_step.set_columns({"trajectory", "predictor"});
  CHECK_THROWS_AS(check_bounds(no_step, cfg), MissingColumn);

  // rows exist but d_h was dropped
  const std::string csv = to_csv(cfg);
  std::istringstream in(csv);
  std::vector<std::string> columns;
  RecordStats stats;
  const auto header = read_records(in, [&](const RunRow& r) { stats.add(r); }, &columns);
  stats.set_names(header.predictors);
  std::erase(columns, "d_h");
  stats.set_columns(columns);
  CHECK_THROWS_AS(check_bounds(stats, cfg), MissingColumn);
}

TEST_CASE("csv and json round trips") {
  const auto cfg = from_yaml(kSmall);
  const auto rows = run_experiment(cfg);
  const auto header = run_header(cfg);
  for (Format f : {Format::csv, Format::json}) {
    std::ostringstream out;
    RecordWriter w(out, f, header);
    for (const auto& r : rows) w.write(r);
    std::istringstream in(out.str());
    std::vector<RunRow> back;
    const auto h = read_records(in, [&](const RunRow& r) { back.push_back(r); });
    CHECK(h.run_id == header.run_id);
    CHECK(h.predictors == header.predictors);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& a = rows[i];
      const auto& b = back[i];
      CHECK(a.trajectory == b.trajectory);
      CHECK(a.step == b.step);
      CHECK(a.predictor == b.predictor);
      CHECK(a.selected == b.selected);
      CHECK(a.errors == b.errors);
      CHECK(a.estimator == b.estimator);
      CHECK(a.seed == b.seed);
      for (auto [x, y] : {std::pair{a.score_bits, b.score_bits}, std::pair{a.d_h, b.d_h},
                          std::pair{a.d_h_stderr, b.d_h_stderr}, std::pair{a.log_ratio_bits, b.log_ratio_bits}}) {
        CHECK(std::isnan(x) == std::isnan(y));
        if (!std::isnan(x)) CHECK(x == y);
      }
    }
  }
}

TEST_CASE("formatting") {
  CHECK(format_double(kNaN) == "");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(parse_format("json") == Format::json);
  CHECK_THROWS(parse_format("xml"));
}

TEST_CASE("empty record set writes only the header") {
  std::ostringstream out;
  RecordWriter w(out, Format::csv, RunHeader{"x", {"mdl"}});
  const std::string text = out.str();
  CHECK(count_lines(text) == 1);
  CHECK(text.rfind("run_id,trajectory,step,predictor,selected_index", 0) == 0);
  std::istringstream in(text);
  std::size_t n = 0;
  read_records(in, [&](const RunRow&) { ++n; });
  CHECK(n == 0);
}

TEST_CASE("summary of a record file") {
  const auto cfg = from_yaml(kSmall);
  const auto stats = stats_of(to_csv(cfg));
  CHECK(stats.rows() == 4 * 31 * 4);
  CHECK(stats.last_step() == 30);
  const auto report = check_bounds(stats, cfg);
  const auto doc = summarize(stats, cfg.checkpoints, &report, &cfg);
  CHECK(doc["rows"] == 4 * 31 * 4);
  CHECK(doc["config_hash"] == config_hash(cfg));
  CHECK(doc["run_id"] == run_id(cfg));
  REQUIRE(doc["predictors"].contains("mdl"));
  CHECK(doc["predictors"]["mdl"]["median_dh"].size() == 2);
  CHECK(doc["predictors"]["bayes-sampled"].contains("errors"));
  CHECK(doc["all_bounds_pass"].is_boolean());
}

TEST_CASE("oscillating truth keeps the selection moving") {
  auto cfg = scenario_config("trouble-osc");
  cfg.trajectories = 6;
  cfg.length = 2000;
  cfg.checkpoints = {100, 2000};
  std::ostringstream out;
  RecordWriter w(out, Format::csv, run_header(cfg));
  run_experiment(cfg, [&](const RunRow& r) { w.write(r); });
  const auto stats = stats_of(out.str());
  const auto flips = stats.selection_flips(0);
  CHECK(flips.count == 6);
  CHECK(flips.mean > 0.0);
  const auto doc = summarize(stats, cfg.checkpoints);
  CHECK(doc["predictors"]["mdl"]["selection_flips"]["mean"].get<double>() == doctest::Approx(flips.mean));
}

TEST_CASE("value trace csv") {
  auto cfg = scenario_config("rl-two-env");
  cfg.trajectories = 5;
  const auto stats = stats_of(to_csv(cfg));
  std::ostringstream out;
  write_values_csv(out, stats, cfg);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,gap,value_sel,value_true,trunc_bound,stderr");
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::stringstream fields(line);
    std::string step, gap;
    std::getline(fields, step, ',');
    std::getline(fields, gap, ',');
    CHECK(std::stod(gap) >= 0.0);
  }
  CHECK(n == cfg.rl->value_steps.size());

  std::ostringstream none;
  write_values_csv(none, stats_of(to_csv(from_yaml(kSmall))), from_yaml(kSmall));
  CHECK(count_lines(none.str()) == 1);
}

}  // TEST_SUITE
