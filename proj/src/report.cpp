#include "mdlp/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mdlp/errors.hpp"

namespace mdlp {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_double(const std::string& s, const std::string& column) {
  if (s.empty()) return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "' in " + column);
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& column) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("bad integer '" + s + "' in " + column);
  }
  return v;
}

Estimator parse_estimator(const std::string& s) {
  if (s == "exact") return Estimator::exact;
  if (s == "mc") return Estimator::monte_carlo;
  return Estimator::none;
}

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double json_double(const json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) return parse_double(j.get<std::string>(), "json");
  return j.get<double>();
}

json estimate_json(const MedianEstimate& m) {
  return json{{"median", number_or_null(m.median)}, {"stderr", number_or_null(m.stderr_)}, {"count", m.count}};
}

json estimate_json(const MeanEstimate& m) {
  return json{{"mean", number_or_null(m.mean)},
              {"stderr", number_or_null(m.stderr_)},
              {"count", m.count},
              {"max", number_or_null(m.max)}};
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("unknown format '" + s + "' (expected csv or json)");
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> kColumns = {
      "run_id",   "trajectory", "step",           "predictor", "selected_index", "score_bits", "d_h",  "d_h_stderr",
      "estimator", "errors_cum", "log_ratio_bits", "value_sel", "value_true",     "value_gap",  "seed"};
  return kColumns;
}

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  if (v == 0.0) return "0";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RecordWriter::RecordWriter(std::ostream& out, Format format, RunHeader header)
    : out_(out), format_(format), header_(std::move(header)) {
  if (format_ == Format::csv) {
    const auto& cols = record_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
  }
}

void RecordWriter::write(const RunRow& r) {
  const std::string& predictor = header_.predictors.at(r.predictor);
  if (format_ == Format::json) {
    json j;
    j["run_id"] = header_.run_id;
    j["trajectory"] = r.trajectory;
    j["step"] = r.step;
    j["predictor"] = predictor;
    j["selected_index"] = r.selected ? json(*r.selected) : json(nullptr);
    j["score_bits"] = number_or_null(r.score_bits);
    j["d_h"] = number_or_null(r.d_h);
    j["d_h_stderr"] = number_or_null(r.d_h_stderr);
    j["estimator"] = to_string(r.estimator);
    j["errors_cum"] = r.errors ? json(*r.errors) : json(nullptr);
    j["log_ratio_bits"] = number_or_null(r.log_ratio_bits);
    j["value_sel"] = number_or_null(r.value_sel);
    j["value_true"] = number_or_null(r.value_true);
    j["value_gap"] = number_or_null(r.value_gap);
    j["seed"] = r.seed;
    out_ << j.dump() << '\n';
    return;
  }
  out_ << csv_escape(header_.run_id) << ',' << r.trajectory << ',' << r.step << ',' << csv_escape(predictor) << ',';
  if (r.selected) out_ << *r.selected;
  out_ << ',' << format_double(r.score_bits) << ',' << format_double(r.d_h) << ',' << format_double(r.d_h_stderr)
       << ',' << to_string(r.estimator) << ',';
  if (r.errors) out_ << *r.errors;
  out_ << ',' << format_double(r.log_ratio_bits) << ',' << format_double(r.value_sel) << ','
       << format_double(r.value_true) << ',' << format_double(r.value_gap) << ',' << r.seed << '\n';
}

RunHeader read_records(std::istream& in, const RowSink& sink, std::vector<std::string>* columns) {
  RunHeader header;
  auto predictor_id = [&](const std::string& name) {
    const auto it = std::find(header.predictors.begin(), header.predictors.end(), name);
    if (it != header.predictors.end()) return static_cast<std::size_t>(it - header.predictors.begin());
    header.predictors.push_back(name);
    return header.predictors.size() - 1;
  };

  std::string line;
  const int first = in.peek();
  if (first == '{') {
    if (columns) *columns = record_columns();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      for (const auto& c : record_columns()) {
        if (!j.contains(c)) throw MissingColumn("records lack the '" + c + "' column");
      }
      RunRow r;
      if (header.run_id.empty()) header.run_id = j["run_id"].get<std::string>();
      r.trajectory = j["trajectory"].get<std::size_t>();
      r.step = j["step"].get<std::size_t>();
      r.predictor = predictor_id(j["predictor"].get<std::string>());
      if (!j["selected_index"].is_null()) r.selected = j["selected_index"].get<std::size_t>();
      r.score_bits = json_double(j["score_bits"]);
      r.d_h = json_double(j["d_h"]);
      r.d_h_stderr = json_double(j["d_h_stderr"]);
      r.estimator = parse_estimator(j["estimator"].get<std::string>());
      if (!j["errors_cum"].is_null()) r.errors = j["errors_cum"].get<std::size_t>();
      r.log_ratio_bits = json_double(j["log_ratio_bits"]);
      r.value_sel = json_double(j["value_sel"]);
      r.value_true = json_double(j["value_true"]);
      r.value_gap = json_double(j["value_gap"]);
      r.seed = j["seed"].get<std::uint64_t>();
      sink(r);
    }
    return header;
  }

  if (!std::getline(in, line)) return header;
  const auto names = split_csv_line(line);
  if (columns) *columns = names;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  };
  for (const char* required : {"trajectory", "step", "predictor"}) {
    if (!column(required)) throw MissingColumn(std::string("records lack the '") + required + "' column");
  }
  const auto c_run = column("run_id"), c_traj = column("trajectory"), c_step = column("step"),
             c_pred = column("predictor"), c_sel = column("selected_index"), c_score = column("score_bits"),
             c_dh = column("d_h"), c_dhse = column("d_h_stderr"), c_est = column("estimator"),
             c_err = column("errors_cum"), c_lr = column("log_ratio_bits"), c_vs = column("value_sel"),
             c_vt = column("value_true"), c_vg = column("value_gap"), c_seed = column("seed");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != names.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(names.size()) +
                               " fields, found " + std::to_string(f.size()));
    }
    auto field = [&](const std::optional<std::size_t>& c) -> const std::string& {
      static const std::string kEmpty;
      return c ? f[*c] : kEmpty;
    };
    auto number = [&](const std::optional<std::size_t>& c, const char* name) { return parse_double(field(c), name); };
    RunRow r;
    if (header.run_id.empty() && c_run) header.run_id = f[*c_run];
    r.trajectory = parse_u64(f[*c_traj], "trajectory");
    r.step = parse_u64(f[*c_step], "step");
    r.predictor = predictor_id(f[*c_pred]);
    if (!field(c_sel).empty()) r.selected = parse_u64(field(c_sel), "selected_index");
    r.score_bits = number(c_score, "score_bits");
    r.d_h = number(c_dh, "d_h");
    r.d_h_stderr = number(c_dhse, "d_h_stderr");
    r.estimator = parse_estimator(field(c_est));
    if (!field(c_err).empty()) r.errors = parse_u64(field(c_err), "errors_cum");
    r.log_ratio_bits = number(c_lr, "log_ratio_bits");
    r.value_sel = number(c_vs, "value_sel");
    r.value_true = number(c_vt, "value_true");
    r.value_gap = number(c_vg, "value_gap");
    if (!field(c_seed).empty()) r.seed = parse_u64(field(c_seed), "seed");
    sink(r);
  }
  return header;
}

RecordStats load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open records");
  RecordStats stats;
  std::vector<std::string> columns;
  try {
    const RunHeader header = read_records(in, [&](const RunRow& r) { stats.add(r); }, &columns);
    stats.set_names(header.predictors);
    stats.set_run_id(header.run_id);
  } catch (const MissingColumn&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  stats.set_columns(std::move(columns));
  return stats;
}

json to_json(const BoundReport& report) {
  json out = json::array();
  for (const auto& c : report.checks) {
    out.push_back(json{{"predictor", c.predictor},
                       {"bound", c.bound},
                       {"description", c.description},
                       {"observed", number_or_null(c.observed)},
                       {"stderr", number_or_null(c.stderr_)},
                       {"limit", number_or_null(c.limit)},
                       {"margin", number_or_null(c.margin)},
                       {"exact", c.exact},
                       {"verdict", to_string(c.verdict)},
                       {"note", c.note}});
  }
  return out;
}

json summarize(const RecordStats& stats, const std::vector<std::size_t>& checkpoints, const BoundReport* bounds,
               const ExperimentConfig* cfg) {
  json out;
  out["run_id"] = stats.run_id();
  out["rows"] = stats.rows();
  out["last_step"] = stats.last_step();
  if (cfg) {
    out["config_hash"] = config_hash(*cfg);
    out["seed"] = cfg->seed;
    out["config"] = canonical_json(*cfg);
  }
  json preds = json::object();
  const std::size_t L = stats.last_step();
  for (std::size_t p = 0; p < stats.predictors().size(); ++p) {
    json s;
    s["trajectories"] = stats.trajectories(p);
    json cps = json::array();
    for (std::size_t step : checkpoints) {
      const auto m = stats.median_dh(p, step);
      if (m.count == 0) continue;
      json c = estimate_json(m);
      c["step"] = step;
      cps.push_back(c);
    }
    s["median_dh"] = cps;
    const auto window = stats.median_dh_window(p, L - L / 10);
    if (window.count > 0) {
      json w = estimate_json(window);
      w["from_step"] = L - L / 10;
      s["final_window_dh"] = w;
    }
    if (const auto c = stats.cumulative_dh(p)) s["cumulative_dh"] = estimate_json(*c);
    if (const auto c = stats.cumulative_dh(p, 2)) s["cumulative_dh_squared"] = estimate_json(*c);
    const auto flips = stats.selection_flips(p);
    json f = estimate_json(flips);
    f["median"] = number_or_null(stats.median_flips(p).median);
    s["selection_flips"] = f;
    if (const auto e = stats.final_errors(p)) s["errors"] = estimate_json(*e);
    json values = json::array();
    for (std::size_t step : stats.value_steps(p)) {
      const auto v = stats.values_at(p, step);
      std::vector<double> gaps;
      for (const auto& x : v) gaps.push_back(x[0]);
      kernels::MomentSums m;
      for (double g : gaps) {
        ++m.count;
        m.sum += g;
        m.sum_sq += g * g;
      }
      values.push_back(json{{"step", step}, {"mean_gap", m.mean()}, {"stderr", m.stderr_of_mean()}});
    }
    if (!values.empty()) s["value_gap"] = values;
    preds[stats.predictors()[p]] = s;
  }
  out["predictors"] = preds;
  if (bounds) {
    out["bounds"] = to_json(*bounds);
    out["all_bounds_pass"] = bounds->all_pass();
  }
  return out;
}

void write_values_csv(std::ostream& out, const RecordStats& stats, const ExperimentConfig& cfg) {
  out << "step,gap,value_sel,value_true,trunc_bound,stderr\n";
  if (!cfg.rl) return;
  const double bound = rl::truncation_bound(cfg.rl->gamma, cfg.rl->effective_horizon());
  for (std::size_t p = 0; p < stats.predictors().size(); ++p) {
    for (std::size_t step : stats.value_steps(p)) {
      kernels::MomentSums gap;
      kernels::CompensatedSum sel, tru;
      const auto values = stats.values_at(p, step);
      for (const auto& v : values) {
        ++gap.count;
        gap.sum += v[0];
        gap.sum_sq += v[0] * v[0];
        sel.add(v[1]);
        tru.add(v[2]);
      }
      const double n = static_cast<double>(values.size());
      out << step << ',' << format_double(gap.mean()) << ',' << format_double(sel.value() / n) << ','
          << format_double(tru.value() / n) << ',' << format_double(bound) << ','
          << format_double(gap.stderr_of_mean()) << '\n';
    }
    break;  // rl experiments record the same values under every predictor
  }
}

}  // namespace mdlp
