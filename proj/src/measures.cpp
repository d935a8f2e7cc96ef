#include "mdlp/measures.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mdlp/errors.hpp"

namespace mdlp {
namespace {

constexpr double kSumTolerance = 1e-9;

void check_distribution(const std::vector<double>& probs, const std::string& field) {
  if (probs.size() < 2) throw InvalidSpec(field, "alphabet must have at least 2 symbols");
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec(field, "probabilities must lie in [0,1]");
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > kSumTolerance) throw InvalidSpec(field, "probabilities must sum to 1");
}

bool is_one_hot(const std::vector<double>& probs) {
  return std::all_of(probs.begin(), probs.end(), [](double p) { return p == 0.0 || p == 1.0; });
}

std::string format_probs(const std::vector<double>& probs) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < probs.size(); ++i) os << (i ? "," : "") << probs[i];
  os << ')';
  return os.str();
}

class DeterministicMeasure final : public Measure {
 public:
  explicit DeterministicMeasure(DeterministicSpec s) : spec_(std::move(s)) {}

  std::size_t alphabet_size() const override { return spec_.alphabet; }
  void predict(SequenceView x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[symbol_at(x.size())] = 1.0;
  }
  bool is_deterministic() const override { return true; }
  std::string describe() const override {
    std::ostringstream os;
    for (Symbol s : spec_.prefix) os << s;
    os << '(' << spec_.tail << ")^inf";
    return os.str();
  }

 private:
  Symbol symbol_at(std::size_t t) const { return t < spec_.prefix.size() ? spec_.prefix[t] : spec_.tail; }
  DeterministicSpec spec_;
};

class CategoricalMeasure final : public Measure {
 public:
  explicit CategoricalMeasure(CategoricalSpec s) : spec_(std::move(s)) {}

  std::size_t alphabet_size() const override { return spec_.probs.size(); }
  void predict(SequenceView, std::span<double> out) const override {
    std::copy(spec_.probs.begin(), spec_.probs.end(), out.begin());
  }
  bool is_deterministic() const override { return is_one_hot(spec_.probs); }
  std::string describe() const override {
    if (spec_.probs.size() == 2) {
      std::ostringstream os;
      os << "Bernoulli(" << spec_.probs[1] << ')';
      return os.str();
    }
    return "Categorical" + format_probs(spec_.probs);
  }

 private:
  CategoricalSpec spec_;
};

class MarkovMeasure final : public Measure {
 public:
  MarkovMeasure(MarkovSpec s, std::size_t alphabet) : spec_(std::move(s)), alphabet_(alphabet) {
    if (spec_.initial.empty()) spec_.initial.assign(alphabet_, 1.0 / static_cast<double>(alphabet_));
  }

  std::size_t alphabet_size() const override { return alphabet_; }
  void predict(SequenceView x, std::span<double> out) const override {
    const auto& row = x.size() < spec_.order ? spec_.initial : spec_.rows[context(x)];
    std::copy(row.begin(), row.end(), out.begin());
  }
  bool is_deterministic() const override {
    return is_one_hot(spec_.initial) &&
           std::all_of(spec_.rows.begin(), spec_.rows.end(), [](const auto& r) { return is_one_hot(r); });
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Markov" << spec_.order << '[';
    for (std::size_t i = 0; i < spec_.rows.size(); ++i) os << (i ? ";" : "") << format_probs(spec_.rows[i]);
    os << ']';
    return os.str();
  }

 private:
  std::size_t context(SequenceView x) const {
    std::size_t c = 0;
    for (std::size_t k = spec_.order; k > 0; --k) c = c * alphabet_ + x[x.size() - k];
    return c;
  }
  MarkovSpec spec_;
  std::size_t alphabet_;
};

class OscillatingBernoulliMeasure final : public Measure {
 public:
  explicit OscillatingBernoulliMeasure(OscillatingBernoulliSpec s) : spec_(s) {}

  std::size_t alphabet_size() const override { return 2; }
  void predict(SequenceView x, std::span<double> out) const override {
    const double t = static_cast<double>(x.size() + 1);
    const double sign = (x.size() + 1) % 2 == 0 ? 1.0 : -1.0;
    const double theta = std::clamp(spec_.limit + sign * spec_.amplitude / std::sqrt(t), spec_.floor, 1.0 - spec_.floor);
    out[0] = 1.0 - theta;
    out[1] = theta;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Oscillating(" << spec_.limit << "+-" << spec_.amplitude << "/sqrt(t))";
    return os.str();
  }

 private:
  OscillatingBernoulliSpec spec_;
};

class BranchingMeasure final : public Measure {
 public:
  BranchingMeasure(std::vector<double> first, std::vector<MeasurePtr> branches)
      : first_(std::move(first)), branches_(std::move(branches)) {}

  std::size_t alphabet_size() const override { return first_.size(); }
  void predict(SequenceView x, std::span<double> out) const override {
    if (x.empty()) {
      std::copy(first_.begin(), first_.end(), out.begin());
      return;
    }
    branches_[x[0]]->predict(x.subspan(1), out);
  }
  bool is_deterministic() const override {
    return is_one_hot(first_) &&
           std::all_of(branches_.begin(), branches_.end(), [](const auto& b) { return b->is_deterministic(); });
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Branching" << format_probs(first_) << '{';
    for (std::size_t i = 0; i < branches_.size(); ++i) os << (i ? "; " : "") << i << "->" << branches_[i]->describe();
    os << '}';
    return os.str();
  }

 private:
  std::vector<double> first_;
  std::vector<MeasurePtr> branches_;
};

MeasurePtr build(const FamilySpec& spec, const std::string& path);

MeasurePtr build_deterministic(const DeterministicSpec& s, const std::string& path) {
  if (s.alphabet < 2) throw InvalidSpec(path + ".alphabet", "must be at least 2");
  if (s.tail >= s.alphabet) throw InvalidSpec(path + ".tail", "symbol out of range");
  for (Symbol c : s.prefix) {
    if (c >= s.alphabet) throw InvalidSpec(path + ".prefix", "symbol out of range");
  }
  return std::make_shared<DeterministicMeasure>(s);
}

MeasurePtr build_markov(const MarkovSpec& s, const std::string& path) {
  if (s.order < 1) throw InvalidSpec(path + ".order", "must be at least 1");
  if (s.rows.empty()) throw InvalidSpec(path + ".rows", "must not be empty");
  const std::size_t alphabet = s.rows.front().size();
  if (alphabet < 2) throw InvalidSpec(path + ".rows", "alphabet must have at least 2 symbols");
  std::size_t contexts = 1;
  for (std::size_t k = 0; k < s.order; ++k) contexts *= alphabet;
  if (s.rows.size() != contexts) {
    throw InvalidSpec(path + ".rows", "expected " + std::to_string(contexts) + " rows for order " + std::to_string(s.order));
  }
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (s.rows[i].size() != alphabet) throw InvalidSpec(path + ".rows[" + std::to_string(i) + "]", "row width mismatch");
    check_distribution(s.rows[i], path + ".rows[" + std::to_string(i) + "]");
  }
  if (!s.initial.empty()) {
    if (s.initial.size() != alphabet) throw InvalidSpec(path + ".initial", "width mismatch");
    check_distribution(s.initial, path + ".initial");
  }
  return std::make_shared<MarkovMeasure>(s, alphabet);
}

MeasurePtr build_oscillating(const OscillatingBernoulliSpec& s, const std::string& path) {
  if (!(s.limit >= 0.0 && s.limit <= 1.0)) throw InvalidSpec(path + ".limit", "must lie in [0,1]");
  if (!(s.amplitude >= 0.0)) throw InvalidSpec(path + ".amplitude", "must be non-negative");
  if (!(s.floor >= 0.0 && s.floor < 0.5)) throw InvalidSpec(path + ".floor", "must lie in [0,0.5)");
  return std::make_shared<OscillatingBernoulliMeasure>(s);
}

MeasurePtr build_branching(const BranchingSpec& s, const std::string& path) {
  check_distribution(s.first, path + ".first");
  if (s.branches.size() != s.first.size()) throw InvalidSpec(path + ".branches", "need one branch per first symbol");
  std::vector<MeasurePtr> branches;
  for (std::size_t i = 0; i < s.branches.size(); ++i) {
    auto b = build(s.branches[i], path + ".branches[" + std::to_string(i) + "]");
    if (b->alphabet_size() != s.first.size()) {
      throw InvalidSpec(path + ".branches[" + std::to_string(i) + "]", "alphabet mismatch");
    }
    branches.push_back(std::move(b));
  }
  return std::make_shared<BranchingMeasure>(s.first, std::move(branches));
}

MeasurePtr build(const FamilySpec& spec, const std::string& path) {
  return std::visit(
      [&](const auto& s) -> MeasurePtr {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DeterministicSpec>) {
          return build_deterministic(s, path);
        } else if constexpr (std::is_same_v<T, CategoricalSpec>) {
          check_distribution(s.probs, path + ".probs");
          return std::make_shared<CategoricalMeasure>(s);
        } else if constexpr (std::is_same_v<T, MarkovSpec>) {
          return build_markov(s, path);
        } else if constexpr (std::is_same_v<T, OscillatingBernoulliSpec>) {
          return build_oscillating(s, path);
        } else {
          return build_branching(s, path);
        }
      },
      spec.params);
}

}  // namespace

MeasurePtr build_family(const FamilySpec& spec) { return build(spec, "family"); }

FamilySpec ones_then_zeros(std::size_t ones) { return FamilySpec::deterministic(Sequence(ones, 1), 0); }

FamilySpec binary_expansion(std::size_t k, std::size_t n) {
  Sequence digits(n);
  for (std::size_t j = 0; j < n; ++j) digits[j] = static_cast<Symbol>((k >> (n - 1 - j)) & 1U);
  return FamilySpec::deterministic(std::move(digits), 0);
}

void validate_prefix(const Measure& m, SequenceView x) {
  const std::size_t n = m.alphabet_size();
  for (Symbol s : x) {
    if (s >= n) throw std::invalid_argument("symbol " + std::to_string(s) + " outside alphabet of size " + std::to_string(n));
  }
}

LogProb log_marginal(const Measure& m, SequenceView x) {
  validate_prefix(m, x);
  std::vector<double> buf(m.alphabet_size());
  double bits = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    m.predict(x.first(t), buf);
    const double p = buf[x[t]];
    if (p <= 0.0) return LogProb::zero();
    bits += std::log2(p);
  }
  return LogProb(bits);
}

LogProb log_conditional(const Measure& m, SequenceView x, SequenceView z) {
  validate_prefix(m, z);
  Sequence buffer(x.begin(), x.end());
  buffer.reserve(x.size() + z.size());
  std::vector<double> probs(m.alphabet_size());
  double bits = 0.0;
  for (Symbol s : z) {
    m.predict(buffer, probs);
    if (probs[s] <= 0.0) return LogProb::zero();
    bits += std::log2(probs[s]);
    buffer.push_back(s);
  }
  return LogProb(bits);
}

std::vector<double> predictive_distribution(const Measure& m, SequenceView x) {
  if (log_marginal(m, x).is_zero()) {
    throw UndefinedConditional(m.describe() + " assigns probability zero to the conditioning prefix");
  }
  std::vector<double> out(m.alphabet_size());
  m.predict(x, out);
  return out;
}

Symbol sample_next(const Measure& m, SequenceView x, RandomStream& rng) {
  const auto probs = predictive_distribution(m, x);
  return static_cast<Symbol>(rng.categorical(probs));
}

Sequence sample_continuation(const Measure& m, SequenceView x, std::size_t n, RandomStream& rng) {
  Sequence out(x.begin(), x.end());
  out.reserve(x.size() + n);
  std::vector<double> probs(m.alphabet_size());
  for (std::size_t t = 0; t < n; ++t) {
    m.predict(out, probs);
    out.push_back(static_cast<Symbol>(rng.categorical(probs)));
  }
  return out;
}

}  // namespace mdlp
