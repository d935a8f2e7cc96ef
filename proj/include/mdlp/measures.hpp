#pragma once

// Measures over finite alphabets, specified through one-step predictive
// distributions and extended to sequences by the chain rule. All logarithms
// are base 2.

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mdlp/random.hpp"

namespace mdlp {

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;
using SequenceView = std::span<const Symbol>;

struct Alphabet {
  std::size_t size = 2;
};

// Log-probability in bits. Probability zero is the distinguished value -inf;
// IEEE arithmetic already gives -inf + finite = -inf and orders -inf first.
class LogProb {
 public:
  constexpr LogProb() = default;
  constexpr explicit LogProb(double bits) : bits_(bits > 0.0 ? 0.0 : bits) {}

  static LogProb from_probability(double p) {
    return p <= 0.0 ? zero() : LogProb(std::log2(p));
  }
  static constexpr LogProb zero() { return LogProb(-std::numeric_limits<double>::infinity()); }
  static constexpr LogProb one() { return LogProb(0.0); }

  constexpr double bits() const { return bits_; }
  constexpr bool is_zero() const { return bits_ == -std::numeric_limits<double>::infinity(); }
  double probability() const { return std::exp2(bits_); }

  friend constexpr LogProb operator+(LogProb a, LogProb b) { return LogProb(a.bits_ + b.bits_); }
  LogProb& operator+=(LogProb o) {
    bits_ += o.bits_;
    return *this;
  }
  friend constexpr auto operator<=>(LogProb a, LogProb b) = default;

 private:
  double bits_ = 0.0;
};

class Measure {
 public:
  virtual ~Measure() = default;

  virtual std::size_t alphabet_size() const = 0;
  // Writes P(a | x) for every symbol a. Does not check that P(x) > 0; the
  // checked entry point is predictive_distribution().
  virtual void predict(SequenceView x, std::span<double> out) const = 0;
  // True when every one-step predictive is a point mass.
  virtual bool is_deterministic() const { return false; }
  virtual std::string describe() const = 0;
};

using MeasurePtr = std::shared_ptr<const Measure>;

// ---- family specifications ------------------------------------------------

// prefix followed by tail^infinity.
struct DeterministicSpec {
  std::size_t alphabet = 2;
  Sequence prefix;
  Symbol tail = 0;
};

// i.i.d. categorical; Bernoulli(theta) is {1 - theta, theta}.
struct CategoricalSpec {
  std::vector<double> probs;
};

// Order-k chain. rows[c] is the next-symbol distribution for context c, where
// c encodes the last k symbols in base |X| with the most recent symbol least
// significant. `initial` is used while fewer than k symbols are available;
// empty means uniform.
struct MarkovSpec {
  std::size_t order = 1;
  std::vector<std::vector<double>> rows;
  std::vector<double> initial;
};

// Independent bits with P(x_t = 1) = clip(limit + (-1)^t * amplitude / sqrt(t), floor, 1 - floor), t >= 1.
struct OscillatingBernoulliSpec {
  double limit = 0.5;
  double amplitude = 0.5;
  double floor = 0.01;
};

struct FamilySpec;

// First symbol drawn from `first`; afterwards the remainder of the sequence
// follows branches[x_1], started afresh.
struct BranchingSpec {
  std::vector<double> first;
  std::vector<FamilySpec> branches;
};

struct FamilySpec {
  std::variant<DeterministicSpec, CategoricalSpec, MarkovSpec, OscillatingBernoulliSpec, BranchingSpec> params;

  static FamilySpec bernoulli(double theta) { return {CategoricalSpec{{1.0 - theta, theta}}}; }
  static FamilySpec deterministic(Sequence prefix, Symbol tail, std::size_t alphabet = 2) {
    return {DeterministicSpec{alphabet, std::move(prefix), tail}};
  }
};

MeasurePtr build_family(const FamilySpec& spec);

// Q_i = 1^{i*h} 0^infinity.
FamilySpec ones_then_zeros(std::size_t ones);
// The n binary digits after the point of k / 2^n, then 0^infinity.
FamilySpec binary_expansion(std::size_t k, std::size_t n);

// ---- operations -------------------------------------------------------------

// Checked: throws UndefinedConditional when m(x) = 0 and std::invalid_argument
// on out-of-range symbols.
std::vector<double> predictive_distribution(const Measure& m, SequenceView x);
LogProb log_marginal(const Measure& m, SequenceView x);
// log2 m(z | x) for the block z following x; -inf when the block is impossible.
LogProb log_conditional(const Measure& m, SequenceView x, SequenceView z);
Symbol sample_next(const Measure& m, SequenceView x, RandomStream& rng);
// Extends x by n symbols drawn from m.
Sequence sample_continuation(const Measure& m, SequenceView x, std::size_t n, RandomStream& rng);

void validate_prefix(const Measure& m, SequenceView x);

}  // namespace mdlp
