#pragma once

// Data-parallel inner loops. Each kernel has a serial reference path and an
// OpenMP path; both produce bit-identical results because work is split into
// fixed shards whose partial results are combined in shard order.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mdlp/measures.hpp"

namespace mdlp::kernels {

enum class Exec { serial, parallel };

// Number of shards used by Monte-Carlo reductions. Independent of the thread
// count so results do not depend on --jobs.
inline constexpr std::size_t kShards = 64;

void set_threads(int jobs);
int max_threads();

// log_marginals[i] += log2 models[i](next | prefix). Entries already at -inf stay there.
void accumulate_log_predictive(std::span<const MeasurePtr> models, SequenceView prefix, Symbol next,
                               std::span<double> log_marginals, Exec exec = Exec::parallel);

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MomentSums {
  std::size_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  // Standard error of the mean.
  double stderr_of_mean() const;
};

// Draws n samples with sample(rng, scratch) -> double, split over kShards
// substreams derived from base_seed. Sample k of shard s always uses the same
// stream, so the result depends only on (n, base_seed). `scratch` starts
// empty and persists across the samples of one shard.
using Sampler = std::function<double(RandomStream&, Sequence& scratch)>;
MomentSums sharded_moments(std::size_t n, std::uint64_t base_seed, const Sampler& sample, Exec exec = Exec::parallel);

// Runs body(i) for i in [0, n). Iterations must write only to their own outputs.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Exec exec = Exec::parallel);

}  // namespace mdlp::kernels
