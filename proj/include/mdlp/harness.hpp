#pragma once

// Seeded experiment runner and bound checker.
//
// Trajectory r draws from the substream derive_seed(seed, r), split further
// into data (child 0), predictor sampling (child 1) and Monte-Carlo (child 2)
// streams, so trajectories never depend on R, on each other or on the number
// of threads.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdlp/config.hpp"
#include "mdlp/kernels.hpp"
#include "mdlp/metrics.hpp"

namespace mdlp {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One (trajectory, step, predictor) record. NaN and empty optionals mean
// "not applicable" and serialize as empty CSV fields.
struct RunRow {
  std::size_t trajectory = 0;
  std::size_t step = 0;
  std::size_t predictor = 0;  // index into RunHeader::predictors
  std::optional<std::size_t> selected;
  double score_bits = kNaN;
  double d_h = kNaN;
  double d_h_stderr = kNaN;
  Estimator estimator = Estimator::none;
  std::optional<std::size_t> errors;
  double log_ratio_bits = kNaN;
  double value_sel = kNaN;
  double value_true = kNaN;
  double value_gap = kNaN;
  std::uint64_t seed = 0;
};

struct RunHeader {
  std::string run_id;
  std::vector<std::string> predictors;
};

using RowSink = std::function<void(const RunRow&)>;

RunHeader run_header(const ExperimentConfig& cfg);

// Streams rows ordered by (trajectory, step, predictor). Throws ConfigError
// when a predictor does not fit the class.
void run_experiment(const ExperimentConfig& cfg, const RowSink& sink, kernels::Exec exec = kernels::Exec::parallel);
std::vector<RunRow> run_experiment(const ExperimentConfig& cfg, kernels::Exec exec = kernels::Exec::parallel);

struct MedianEstimate {
  double median = kNaN;
  double stderr_ = kNaN;  // bootstrap
  std::size_t count = 0;
};

struct MeanEstimate {
  double mean = kNaN;
  double stderr_ = kNaN;
  std::size_t count = 0;
  double max = kNaN;
};

// Per-trajectory series for each predictor, gathered from a row stream.
class RecordStats {
 public:
  RecordStats() = default;
  explicit RecordStats(std::vector<std::string> predictors) : names_(std::move(predictors)) {}

  void add(const RunRow& row);
  void set_names(std::vector<std::string> names) { names_ = std::move(names); }
  void set_columns(std::vector<std::string> columns) { columns_ = std::move(columns); }
  bool has_column(const std::string& column) const;

  const std::vector<std::string>& predictors() const { return names_; }
  std::optional<std::size_t> predictor_index(const std::string& name) const;
  std::size_t trajectories(std::size_t p) const;
  std::size_t last_step() const { return last_step_; }
  std::size_t rows() const { return rows_; }
  const std::string& run_id() const { return run_id_; }
  void set_run_id(std::string id) { run_id_ = std::move(id); }

  // Median across trajectories of d_h at one step.
  MedianEstimate median_dh(std::size_t p, std::size_t step) const;
  // Median of d_h over every (trajectory, step) with step >= from.
  MedianEstimate median_dh_window(std::size_t p, std::size_t from) const;
  // Mean over trajectories of sum_l d_h^power; nullopt when some step lacks d_h.
  std::optional<MeanEstimate> cumulative_dh(std::size_t p, int power = 1) const;
  // Number of steps at which the selected index changed.
  MeanEstimate selection_flips(std::size_t p) const;
  MedianEstimate median_flips(std::size_t p) const;
  // Errors at the last step.
  std::optional<MeanEstimate> final_errors(std::size_t p) const;
  std::vector<std::size_t> value_steps(std::size_t p) const;
  // Per-trajectory value records at a step: (gap, value_sel, value_true).
  std::vector<std::array<double, 3>> values_at(std::size_t p, std::size_t step) const;

 private:
  struct Series {
    std::vector<double> dh;
    std::vector<std::int64_t> selected;  // -1: none
    std::vector<double> errors;          // NaN: none
    std::map<std::size_t, std::array<double, 3>> values;
    std::size_t steps = 0;
  };
  Series& series(std::size_t p, std::size_t trajectory);

  std::vector<std::string> names_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Series>> data_;  // [predictor][trajectory]
  std::size_t last_step_ = 0;
  std::size_t rows_ = 0;
  std::string run_id_;
};

enum class Verdict { pass, fail, skipped };
std::string to_string(Verdict v);

struct BoundCheck {
  std::string predictor;
  std::string bound;  // short identifier
  std::string description;
  double observed = kNaN;
  double stderr_ = 0.0;
  double limit = kNaN;
  double margin = kNaN;  // limit - observed
  bool exact = false;    // integer comparison without noise allowance
  Verdict verdict = Verdict::skipped;
  std::string note;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  bool all_pass() const;
};

// Compares trajectory averages with the cumulative distance bounds, the
// deterministic error bounds and any configured expectations. Throws
// MissingColumn when a needed column or predictor is absent.
BoundReport check_bounds(const RecordStats& stats, const ExperimentConfig& cfg);
BoundReport check_bounds(std::span<const RunRow> rows, const ExperimentConfig& cfg);

}  // namespace mdlp
