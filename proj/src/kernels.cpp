#include "mdlp/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

namespace mdlp::kernels {

namespace {

// Minimum models per update before the OpenMP path is worth its overhead.
constexpr std::size_t kParallelModelThreshold = 256;

void update_one(const Measure& m, SequenceView prefix, Symbol next, double& lm, std::vector<double>& buf) {
  if (lm == -std::numeric_limits<double>::infinity()) return;
  buf.resize(m.alphabet_size());
  m.predict(prefix, buf);
  const double p = buf[next];
  lm = p > 0.0 ? lm + std::log2(p) : -std::numeric_limits<double>::infinity();
}

// Exceptions must not escape an OpenMP region; capture the first and rethrow.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace

void set_threads(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

int max_threads() { return omp_get_max_threads(); }

double MomentSums::stderr_of_mean() const {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
  return std::sqrt(var / n);
}

void accumulate_log_predictive(std::span<const MeasurePtr> models, SequenceView prefix, Symbol next,
                               std::span<double> log_marginals, Exec exec) {
  const std::size_t n = models.size();
  if (exec == Exec::serial || n < kParallelModelThreshold) {
    std::vector<double> buf;
    for (std::size_t i = 0; i < n; ++i) update_one(*models[i], prefix, next, log_marginals[i], buf);
    return;
  }
  ExceptionSlot slot;
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      slot.run([&] { update_one(*models[i], prefix, next, log_marginals[i], buf); });
    }
  }
  slot.rethrow();
}

MomentSums sharded_moments(std::size_t n, std::uint64_t base_seed, const Sampler& sample, Exec exec) {
  struct Shard {
    CompensatedSum sum, sum_sq;
    std::size_t count = 0;
  };
  std::vector<Shard> shards(kShards);
  auto run_shard = [&](std::size_t s) {
    RandomStream rng(derive_seed(base_seed, s));
    Sequence scratch;
    const std::size_t begin = n * s / kShards;
    const std::size_t end = n * (s + 1) / kShards;
    for (std::size_t k = begin; k < end; ++k) {
      const double v = sample(rng, scratch);
      shards[s].sum.add(v);
      shards[s].sum_sq.add(v * v);
      ++shards[s].count;
    }
  };
  for_each_index(kShards, run_shard, exec);

  CompensatedSum sum, sum_sq;
  MomentSums out;
  for (const auto& s : shards) {
    sum.add(s.sum.value());
    sum_sq.add(s.sum_sq.value());
    out.count += s.count;
  }
  out.sum = sum.value();
  out.sum_sq = sum_sq.value();
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Exec exec) {
  if (exec == Exec::serial || max_threads() <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < n; ++i) {
    slot.run([&] { body(i); });
  }
  slot.rethrow();
}

}  // namespace mdlp::kernels
