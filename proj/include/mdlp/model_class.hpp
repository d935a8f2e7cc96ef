#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mdlp/measures.hpp"

namespace mdlp {

// Sum of 1/i^2 is pi^2/6, so the default two-log codelengths need a Kraft
// bound above one.
inline constexpr double kDefaultKraftBound = 1.645 * 2.0;
inline constexpr std::size_t kDefaultCutoff = 10000;

enum class ComplexityRule {
  two_log,   // K(Q_i) = 2 log2 i
  explicit_list,
  uniform,   // K = log2 n over a finite class of n models
};

struct ComplexityAssignment {
  ComplexityRule rule = ComplexityRule::two_log;
  std::vector<double> bits;  // explicit_list only

  static ComplexityAssignment two_log() { return {}; }
  static ComplexityAssignment uniform() { return {ComplexityRule::uniform, {}}; }
  static ComplexityAssignment explicit_bits(std::vector<double> k) { return {ComplexityRule::explicit_list, std::move(k)}; }
};

// Codelengths for indices 1..n under the rule.
std::vector<double> assign_codelengths(const ComplexityAssignment& rule, std::size_t n);

// Ordered countable family (Q_1, Q_2, ...) with codelengths, enumerated up to
// a cutoff. Indices are 1-based. Copies share the lazily filled model cache.
class ModelClass {
 public:
  using Generator = std::function<MeasurePtr(std::size_t index)>;

  static ModelClass from_list(std::vector<MeasurePtr> models, const ComplexityAssignment& rule,
                              double kraft_bound = kDefaultKraftBound);
  // A countably infinite class truncated at `cutoff`. Only the two-log rule
  // (or an explicit list covering the cutoff) is accepted.
  static ModelClass from_generator(Generator gen, std::size_t cutoff, const ComplexityAssignment& rule,
                                   double kraft_bound = kDefaultKraftBound);

  std::size_t size() const;
  bool is_infinite() const;
  ComplexityRule rule() const;
  double kraft_bound() const;

  double codelength(std::size_t index) const;
  const std::vector<double>& codelengths() const;

  const Measure& model(std::size_t index) const { return *model_ptr(index); }
  MeasurePtr model_ptr(std::size_t index) const;
  // Forces enumeration of every model up to the cutoff.
  const std::vector<MeasurePtr>& enumerate() const;

  std::size_t alphabet_size() const;
  bool is_deterministic() const;

  std::optional<std::size_t> truth_index() const { return truth_; }
  ModelClass with_truth(std::size_t index) const;

 private:
  struct Impl;
  explicit ModelClass(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
  std::optional<std::size_t> truth_;
};

// sum_{i <= upto} 2^{-K(Q_i)}.
double kraft_mass(const ModelClass& c, std::size_t upto);
// Total Kraft mass of the (untruncated) class when known analytically or the
// class is finite.
std::optional<double> kraft_total(const ModelClass& c);

struct TailWeight {
  double value = 0.0;
  // Set when the tail could only be summed up to the enumeration cutoff.
  bool truncated = false;
};

// delta(m) = sum_{i > m} 2^{-K(Q_i)}.
TailWeight tail_weight(const ModelClass& c, std::size_t m);

// sum_{i > m} 1/i^2 via direct summation plus an Euler-Maclaurin tail.
double inverse_square_tail(std::size_t m);

// Least m with tail_weight(c, m) * 2^{K(P)} <= eps. Throws CutoffExhausted.
std::size_t effective_size(const ModelClass& c, double eps);

}  // namespace mdlp
