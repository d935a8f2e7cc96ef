#pragma once

// Distances between predictive distributions:
//   d_h(P, Q | x) = sum over z in X^h of |P(z | x) - Q(z | x)|,
// which is non-decreasing in h and bounded by 2 (twice the total variation
// distance in the limit). Only finite h is ever computed.

#include <optional>
#include <string>
#include <vector>

#include "mdlp/kernels.hpp"
#include "mdlp/measures.hpp"

namespace mdlp {

inline constexpr std::size_t kDefaultEnumerationBudget = std::size_t{1} << 20;

// Block probabilities P(z | x) for all z in X^h in lexicographic order.
// Subtrees of probability zero are not expanded. Throws BudgetExceeded when
// |X|^h exceeds the budget. Does not check P(x) > 0.
std::vector<double> block_distribution(const Measure& m, SequenceView x, std::size_t h,
                                       std::size_t budget = kDefaultEnumerationBudget);
// Same, extending `buffer` in place (restored on return).
void block_distribution_into(const Measure& m, Sequence& buffer, std::size_t h, std::span<double> out);

double l1_distance(std::span<const double> a, std::span<const double> b);

// Exact d_h by enumeration; checks both conditionals exist.
double dh_exact(const Measure& p, const Measure& q, SequenceView x, std::size_t h,
                std::size_t budget = kDefaultEnumerationBudget);

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// Unbiased d_h estimate: z is drawn from M = (P(.|x) + Q(.|x)) / 2 by tossing
// a fair coin for which measure rolls out the whole block, and scored by
// |P(z|x) - Q(z|x)| / M(z|x), which lies in [0, 2].
McEstimate dh_monte_carlo(const Measure& p, const Measure& q, SequenceView x, std::size_t h, std::size_t n,
                          RandomStream& rng);
// Same estimator without the O(|x|) checks, seeded directly. Callers must
// know that P(x) > 0 and Q(x) > 0.
McEstimate dh_monte_carlo_unchecked(const Measure& p, const Measure& q, SequenceView x, std::size_t h, std::size_t n,
                                    std::uint64_t base_seed, kernels::Exec exec = kernels::Exec::parallel);

enum class Estimator { exact, monte_carlo, none };
std::string to_string(Estimator e);

struct DistanceStep {
  std::size_t step = 0;
  double value = 0.0;  // trajectory-averaged d_h at this step
  Estimator estimator = Estimator::exact;
  double stderr_ = 0.0;
};

struct DistanceReport {
  std::string predictor;
  std::size_t horizon = 1;
  std::vector<DistanceStep> steps;
  std::vector<double> cumulative;         // mean over trajectories of sum_{l <= L} d_h
  std::vector<double> cumulative_stderr;  // across trajectories
  std::size_t trajectories = 0;
  double errors_mean = 0.0;
  std::size_t errors_max = 0;
};

// Per-trajectory inputs to cumulative_dh: d_h per step (NaN = not computed)
// and the final error count.
struct TrajectoryDistances {
  std::vector<double> dh;
  std::vector<double> dh_stderr;
  Estimator estimator = Estimator::exact;
  std::size_t errors = 0;
};

DistanceReport cumulative_dh(const std::string& predictor, std::size_t horizon,
                             const std::vector<TrajectoryDistances>& runs);

// Running log2 [Q(x_{1:l}) / P(x_{1:l})] along a sequence.
struct LogRatioTrace {
  // values[l] for l = 0..n. From the absorption step on, the value is -inf
  // (Q reached zero) or +inf (P reached zero) and is not computed further.
  std::vector<double> values;
  std::optional<std::size_t> absorbed_at;
  double last = 0.0;
  std::size_t sign_changes = 0;  // of (trace - last finite value) over the finite part
  double window_max = 0.0;
  double window_min = 0.0;
};

LogRatioTrace log_ratio_trace(const Measure& q, const Measure& p, SequenceView omega, std::size_t window = 100);

}  // namespace mdlp
