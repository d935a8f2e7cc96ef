#pragma once

// MDL/MAP selection, Bayes mixture, incremental MDL (MDLI), and the two
// deterministic learners: elimination and weighted majority.
//
// Model indices are 1-based throughout, matching ModelClass.

#include <deque>
#include <optional>
#include <vector>

#include "mdlp/kernels.hpp"
#include "mdlp/model_class.hpp"

namespace mdlp {

// Scores within this many bits of the optimum count as tied; ties go to the
// lowest index.
inline constexpr double kTieToleranceBits = 1e-9;

struct Selection {
  std::size_t index = 0;
  // L_Q(x) = -log2 Q(x) + K(Q); +inf for models with Q(x) = 0.
  std::vector<double> scores;
};

// Lowest 1-based index whose score is within kTieToleranceBits of the minimum.
// Throws AllExcluded when every score is +inf.
std::size_t argmin_lowest_index(std::span<const double> scores);

// log2 Q_i(x) for every enumerated model.
std::vector<double> log_marginals(const ModelClass& c, SequenceView x);
// log2 w_i with w_i = 2^{-K_i} renormalized over the enumerated models.
std::vector<double> prior_log_weights(const ModelClass& c);

struct Posterior {
  std::vector<double> weights;
  LogProb log_mixture;  // log2 Bayes(x)
};
// Posterior from prior log-weights and log-marginals. Throws AllExcluded when Bayes(x) = 0.
Posterior posterior_from_log_marginals(std::span<const double> log_prior, std::span<const double> log_marginals);

Selection mdl_select(const ModelClass& c, SequenceView x);
// MDL^x(z | x) for the block z.
double mdl_predict(const ModelClass& c, SequenceView x, SequenceView z);
// argmax_Q Pr(Q | x) with prior w_Q = 2^{-K(Q)}; computed through the posterior.
std::size_t map_select(const ModelClass& c, SequenceView x);

std::vector<double> bayes_posterior(const ModelClass& c, SequenceView x);
LogProb log_bayes(const ModelClass& c, SequenceView x);
double bayes_predict(const ModelClass& c, SequenceView x, SequenceView z);

// Bayes(. | x0) as a measure on continuations of an anchor prefix x0 of
// length anchor_length. predict() must be called with prefixes extending x0.
class ConditionedMixture final : public Measure {
 public:
  ConditionedMixture(std::vector<MeasurePtr> models, std::vector<double> weights, std::size_t anchor_length);

  std::size_t alphabet_size() const override { return alphabet_; }
  void predict(SequenceView x, std::span<double> out) const override;
  std::string describe() const override { return "BayesMixture"; }

 private:
  std::vector<MeasurePtr> models_;
  std::vector<double> log_weights_;
  std::size_t anchor_;
  std::size_t alphabet_;
};

// MDLI(. | x0): at each continuation step predicts with the model selected
// by MDL on everything seen so far. Scores are L_Q(x0).
class ConditionedMdli final : public Measure {
 public:
  ConditionedMdli(std::vector<MeasurePtr> models, std::vector<double> scores, std::size_t anchor_length);

  std::size_t alphabet_size() const override { return alphabet_; }
  void predict(SequenceView x, std::span<double> out) const override;
  std::string describe() const override { return "MDLI"; }

 private:
  std::vector<MeasurePtr> models_;
  std::vector<double> scores_;
  std::size_t anchor_;
  std::size_t alphabet_;
};

struct MdliState {
  double log2_mdli = 0.0;  // -inf once a step had zero predictive mass
  std::vector<std::size_t> selections;
};

// Appends log2 MDL^{x_<t}(x_t | x_<t) to the running total.
MdliState mdli_step(MdliState s, const ModelClass& c, SequenceView past, Symbol next);

// Elimination learner for deterministic classes. At time t (before x_t is
// seen) the simplest alive model predicts the block x_{t..t+h-1}. A block
// prediction counts as one error, charged when its first wrong symbol is
// revealed.
struct AliveSet {
  struct PendingBlock {
    std::size_t start = 0;
    Sequence symbols;
    bool wrong = false;
  };

  std::vector<std::size_t> alive;  // ascending
  std::size_t errors = 0;
  std::size_t horizon = 1;
  Sequence history;
  std::deque<PendingBlock> pending;

  std::size_t simplest() const { return alive.empty() ? 0 : alive.front(); }
};

AliveSet make_alive_set(const ModelClass& c, std::size_t horizon);
// t is 1-based and must equal history.size() + 1.
AliveSet eliminate_step(AliveSet a, const ModelClass& c, std::size_t t, Symbol observed);
// The block the simplest alive model predicts for x_{t..t+h-1}.
Sequence predict_block(const AliveSet& a, const ModelClass& c);

// Weighted-majority learner for deterministic classes: predicts the symbol
// carrying the largest alive weight (at least half of it on binary
// alphabets); ties go to the lowest symbol.
struct WeightedAliveSet {
  std::vector<std::size_t> alive;
  std::vector<double> weights;  // prior weight per model, indexed by model index - 1
  double alive_weight = 1.0;
  std::size_t errors = 0;
  Sequence history;
  std::optional<Symbol> last_prediction;
};

WeightedAliveSet make_weighted_alive_set(const ModelClass& c);
Symbol majority_prediction(const WeightedAliveSet& w, const ModelClass& c);
WeightedAliveSet majority_step(WeightedAliveSet w, const ModelClass& c, std::size_t t, Symbol observed);

// Deterministic continuation of x under a point-mass measure.
Sequence deterministic_block(const Measure& m, SequenceView x, std::size_t h);

}  // namespace mdlp
