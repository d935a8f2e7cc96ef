#include "mdlp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdlp/errors.hpp"
#include "mdlp/kernels.hpp"

namespace mdlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t block_count(std::size_t alphabet, std::size_t h, std::size_t budget) {
  std::size_t n = 1;
  for (std::size_t k = 0; k < h; ++k) {
    if (n > budget / alphabet) {
      throw BudgetExceeded("|X|^h exceeds the enumeration budget of " + std::to_string(budget) +
                           "; use the Monte-Carlo estimator");
    }
    n *= alphabet;
  }
  if (n > budget) throw BudgetExceeded("|X|^h exceeds the enumeration budget; use the Monte-Carlo estimator");
  return n;
}

void expand(const Measure& m, Sequence& buffer, std::size_t depth, std::size_t h, double prob, std::size_t offset,
            std::vector<std::vector<double>>& scratch, std::span<double> out) {
  if (depth == h) {
    out[offset] = prob;
    return;
  }
  auto& probs = scratch[depth];
  m.predict(buffer, probs);
  const std::size_t a = probs.size();
  for (std::size_t s = 0; s < a; ++s) {
    const double child = prob * probs[s];
    if (child <= 0.0) continue;  // leaves already zero
    buffer.push_back(static_cast<Symbol>(s));
    expand(m, buffer, depth + 1, h, child, offset * a + s, scratch, out);
    buffer.pop_back();
  }
}

void require_conditional(const Measure& m, SequenceView x) {
  if (log_marginal(m, x).is_zero()) {
    throw UndefinedConditional(m.describe() + " assigns probability zero to the conditioning prefix");
  }
}

}  // namespace

void block_distribution_into(const Measure& m, Sequence& buffer, std::size_t h, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<std::vector<double>> scratch(h, std::vector<double>(m.alphabet_size()));
  expand(m, buffer, 0, h, 1.0, 0, scratch, out);
}

std::vector<double> block_distribution(const Measure& m, SequenceView x, std::size_t h, std::size_t budget) {
  validate_prefix(m, x);
  std::vector<double> out(block_count(m.alphabet_size(), h, budget));
  Sequence buffer(x.begin(), x.end());
  buffer.reserve(x.size() + h);
  block_distribution_into(m, buffer, h, out);
  return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  kernels::CompensatedSum sum;
  for (std::size_t i = 0; i < a.size(); ++i) sum.add(std::abs(a[i] - b[i]));
  return sum.value();
}

double dh_exact(const Measure& p, const Measure& q, SequenceView x, std::size_t h, std::size_t budget) {
  if (p.alphabet_size() != q.alphabet_size()) throw std::invalid_argument("dh_exact: alphabet mismatch");
  block_count(p.alphabet_size(), h, budget);
  require_conditional(p, x);
  require_conditional(q, x);
  const auto bp = block_distribution(p, x, h, budget);
  const auto bq = block_distribution(q, x, h, budget);
  return std::min(2.0, l1_distance(bp, bq));
}

McEstimate dh_monte_carlo(const Measure& p, const Measure& q, SequenceView x, std::size_t h, std::size_t n,
                          RandomStream& rng) {
  if (p.alphabet_size() != q.alphabet_size()) throw std::invalid_argument("dh_monte_carlo: alphabet mismatch");
  if (n == 0) throw std::invalid_argument("dh_monte_carlo: need at least one sample");
  require_conditional(p, x);
  require_conditional(q, x);
  return dh_monte_carlo_unchecked(p, q, x, h, n, rng.next_u64());
}

McEstimate dh_monte_carlo_unchecked(const Measure& p, const Measure& q, SequenceView x, std::size_t h, std::size_t n,
                                    std::uint64_t base_seed, kernels::Exec exec) {
  const std::size_t alphabet = p.alphabet_size();
  auto sample = [&](RandomStream& r, Sequence& buffer) {
    if (buffer.empty()) {
      buffer.reserve(x.size() + h);
      buffer.assign(x.begin(), x.end());
    }
    buffer.resize(x.size());
    const bool from_p = r.uniform() < 0.5;
    std::vector<double> pp(alphabet), qq(alphabet);
    double lp = 0.0, lq = 0.0;
    for (std::size_t k = 0; k < h; ++k) {
      p.predict(buffer, pp);
      q.predict(buffer, qq);
      const auto s = static_cast<Symbol>(r.categorical(from_p ? std::span<const double>(pp) : std::span<const double>(qq)));
      lp = pp[s] > 0.0 ? lp + std::log2(pp[s]) : -kInf;
      lq = qq[s] > 0.0 ? lq + std::log2(qq[s]) : -kInf;
      buffer.push_back(s);
    }
    if (lp == lq) return 0.0;
    if (lp == -kInf || lq == -kInf) return 2.0;
    // 2|P - Q| / (P + Q) written through the ratio of the smaller to the larger.
    const double r_small = std::exp2(-std::abs(lq - lp));
    return 2.0 * (1.0 - r_small) / (1.0 + r_small);
  };

  const auto moments = kernels::sharded_moments(n, base_seed, sample, exec);
  return {moments.mean(), moments.stderr_of_mean(), moments.count};
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::exact:
      return "exact";
    case Estimator::monte_carlo:
      return "mc";
    case Estimator::none:
      return "none";
  }
  return "none";
}

DistanceReport cumulative_dh(const std::string& predictor, std::size_t horizon,
                             const std::vector<TrajectoryDistances>& runs) {
  DistanceReport report;
  report.predictor = predictor;
  report.horizon = horizon;
  report.trajectories = runs.size();
  if (runs.empty()) return report;

  std::size_t steps = 0;
  for (const auto& r : runs) steps = std::max(steps, r.dh.size());

  std::vector<std::vector<double>> cum(runs.size(), std::vector<double>(steps, 0.0));
  for (std::size_t k = 0; k < runs.size(); ++k) {
    kernels::CompensatedSum running;
    for (std::size_t l = 0; l < steps; ++l) {
      if (l < runs[k].dh.size() && !std::isnan(runs[k].dh[l])) running.add(runs[k].dh[l]);
      cum[k][l] = running.value();
    }
  }

  auto mean_and_stderr = [&](auto&& value_at) {
    kernels::MomentSums m;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const double v = value_at(k);
      if (std::isnan(v)) continue;
      ++m.count;
      m.sum += v;
      m.sum_sq += v * v;
    }
    return m;
  };

  report.cumulative.resize(steps);
  report.cumulative_stderr.resize(steps);
  for (std::size_t l = 0; l < steps; ++l) {
    const auto per_step = mean_and_stderr([&](std::size_t k) {
      return l < runs[k].dh.size() ? runs[k].dh[l] : std::numeric_limits<double>::quiet_NaN();
    });
    report.steps.push_back({l, per_step.mean(), runs.front().estimator, per_step.stderr_of_mean()});
    const auto c = mean_and_stderr([&](std::size_t k) { return cum[k][l]; });
    report.cumulative[l] = c.mean();
    report.cumulative_stderr[l] = c.stderr_of_mean();
  }

  double total_errors = 0.0;
  for (const auto& r : runs) {
    total_errors += static_cast<double>(r.errors);
    report.errors_max = std::max(report.errors_max, r.errors);
  }
  report.errors_mean = total_errors / static_cast<double>(runs.size());
  return report;
}

LogRatioTrace log_ratio_trace(const Measure& q, const Measure& p, SequenceView omega, std::size_t window) {
  validate_prefix(p, omega);
  validate_prefix(q, omega);
  LogRatioTrace trace;
  trace.values.assign(omega.size() + 1, 0.0);
  std::vector<double> pp(p.alphabet_size()), qq(q.alphabet_size());
  double lq = 0.0, lp = 0.0;
  std::size_t finite_end = omega.size();  // values[0..finite_end] are finite
  for (std::size_t t = 0; t < omega.size(); ++t) {
    q.predict(omega.first(t), qq);
    p.predict(omega.first(t), pp);
    const Symbol s = omega[t];
    if (qq[s] <= 0.0 || pp[s] <= 0.0) {
      trace.absorbed_at = t + 1;
      finite_end = t;
      const double absorbed = qq[s] <= 0.0 ? -kInf : kInf;
      std::fill(trace.values.begin() + static_cast<std::ptrdiff_t>(t + 1), trace.values.end(), absorbed);
      break;
    }
    lq += std::log2(qq[s]);
    lp += std::log2(pp[s]);
    trace.values[t + 1] = lq - lp;
  }

  const double reference = trace.values[finite_end];
  trace.last = trace.absorbed_at ? trace.values.back() : reference;
  int previous = 0;
  for (std::size_t l = 0; l <= finite_end; ++l) {
    const double d = trace.values[l] - reference;
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign != 0) {
      if (previous != 0 && sign != previous) ++trace.sign_changes;
      previous = sign;
    }
  }
  const std::size_t begin = finite_end + 1 > window ? finite_end + 1 - window : 0;
  trace.window_max = -kInf;
  trace.window_min = kInf;
  for (std::size_t l = begin; l <= finite_end; ++l) {
    trace.window_max = std::max(trace.window_max, trace.values[l]);
    trace.window_min = std::min(trace.window_min, trace.values[l]);
  }
  return trace;
}

}  // namespace mdlp
