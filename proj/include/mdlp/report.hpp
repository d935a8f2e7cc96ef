#pragma once

// Record serialization and summaries.
//
// CSV columns, in order:
//   run_id, trajectory, step, predictor, selected_index, score_bits, d_h,
//   d_h_stderr, estimator, errors_cum, log_ratio_bits, value_sel, value_true,
//   value_gap, seed
// Empty fields mean "not applicable". The JSON format writes one object per
// line with the same keys (null for empty fields).

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdlp/harness.hpp"

namespace mdlp {

enum class Format { csv, json };
Format parse_format(const std::string& s);

const std::vector<std::string>& record_columns();

// Shortest round-trip decimal; empty for NaN.
std::string format_double(double v);

class RecordWriter {
 public:
  RecordWriter(std::ostream& out, Format format, RunHeader header);
  void write(const RunRow& row);

 private:
  std::ostream& out_;
  Format format_;
  RunHeader header_;
};

// Reads CSV or JSON-lines records (detected from the first byte). Predictor
// names are numbered in order of first appearance; the header is returned
// with those names and the run_id of the first row.
RunHeader read_records(std::istream& in, const RowSink& sink, std::vector<std::string>* columns = nullptr);
// Convenience: reads a file into RecordStats. Throws std::runtime_error with
// the path on I/O failure.
RecordStats load_records(const std::string& path);

// Summary document: medians of d_h at checkpoints, final-window medians,
// selection flips, cumulative sums, error counts, value gaps and, when given,
// bound verdicts.
nlohmann::json summarize(const RecordStats& stats, const std::vector<std::size_t>& checkpoints,
                         const BoundReport* bounds = nullptr, const ExperimentConfig* cfg = nullptr);
nlohmann::json to_json(const BoundReport& report);

// Value trace aggregated over trajectories:
//   step, gap, value_sel, value_true, trunc_bound, stderr
// (means across trajectories; stderr of the mean gap).
void write_values_csv(std::ostream& out, const RecordStats& stats, const ExperimentConfig& cfg);

}  // namespace mdlp
