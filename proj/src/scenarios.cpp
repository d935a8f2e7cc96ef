#include "mdlp/scenarios.hpp"

#include "mdlp/errors.hpp"

namespace mdlp {

namespace {

const char* const kDetElimination = R"(name: det-elimination
seed: 1
trajectories: 100
length: 32
class:
  generator: {kind: ones-then-zeros, block: 3, size: 4}
  complexity: two-log
truth: 4
predictors:
  - {kind: elimination, h: 3}
  - {kind: elimination, h: 1}
  - mdl
checkpoints: [4, 16, 32]
)";

const char* const kDetEliminationH1 = R"(name: det-elimination-h1
seed: 1
trajectories: 100
length: 32
class:
  generator: {kind: ones-then-zeros, block: 1, size: 4}
  complexity: two-log
truth: 4
predictors: [elimination]
checkpoints: [4, 16, 32]
)";

const char* const kDetMajority = R"(name: det-majority
seed: 1
trajectories: 1000
length: 16
class:
  generator: {kind: binary-expansion, digits: 6}
  complexity: uniform
truth: 43
predictors: [majority, bayes-sampled]
checkpoints: [0, 6, 16]
)";

const char* const kBernoulliPair = R"(name: bernoulli-pair
seed: 1
trajectories: 1000
length: 1000
class:
  models:
    - {kind: bernoulli, theta: 0.5}
    - {kind: bernoulli, theta: 0.75}
  complexity: explicit
  codelengths: [1, 1]
truth: 1
predictors: [mdl, bayes]
checkpoints: [100, 500, 1000]
)";

const char* const kMarkovClass = R"(name: markov-class
seed: 1
trajectories: 200
length: 2000
class:
  models:
    - {kind: bernoulli, theta: 0.5}
    - {kind: bernoulli, theta: 0.3}
    - {kind: markov, order: 1, rows: [[0.9, 0.1], [0.2, 0.8]]}
    - {kind: markov, order: 1, rows: [[0.8, 0.2], [0.3, 0.7]]}
    - {kind: markov, order: 2, rows: [[0.85, 0.15], [0.25, 0.75], [0.9, 0.1], [0.15, 0.85]]}
  complexity: two-log
truth: 3
predictors:
  - {kind: mdl, h: 4}
checkpoints: [100, 500, 2000]
expect: {dh_median_below: 0.01, monotone_checkpoints: true}
)";

const char* const kTroubleOsc = R"(name: trouble-osc
seed: 1
trajectories: 200
length: 10000
class:
  models:
    - {kind: oscillating, limit: 0.5, amplitude: 0.2, floor: 0.01}
    - {kind: bernoulli, theta: 0.5}
  complexity: explicit
  codelengths: [1, 1]
truth: 2
log_ratio_model: 1
predictors: [mdl]
checkpoints: [100, 1000, 10000]
expect: {dh_median_below: 0.02, final_window: true, min_mean_flips: 10}
)";

const char* const kBranching = R"(name: branching-nonergodic
seed: 1
trajectories: 200
length: 2000
class:
  models:
    - kind: branching
      first: [0.5, 0.5]
      branches: [{kind: bernoulli, theta: 0.6}, {kind: bernoulli, theta: 0.5}]
    - kind: branching
      first: [0.5, 0.5]
      branches: [{kind: bernoulli, theta: 0.9}, {kind: bernoulli, theta: 0.5}]
  complexity: explicit
  codelengths: [1, 1]
truth: 2
predictors:
  - {kind: mdl, h: 4}
checkpoints: [100, 500, 2000]
expect: {dh_median_below: 0.01, monotone_checkpoints: true}
)";

const char* const kRlTwoEnv = R"(name: rl-two-env
seed: 1
trajectories: 100
length: 500
rl:
  environments:
    - {kind: action-reward, reward_prob: [0.1, 0.9]}
    - {kind: action-reward, reward_prob: [0.5, 0.5]}
  complexity: explicit
  codelengths: [1, 1]
  policy: {kind: stochastic, probs: [0.3, 0.7]}
  gamma: 0.5
  horizon: 20
  rollouts: 1000
  value_steps: [0, 10, 100, 500]
  gap_tolerance: 0.05
  gap_quantile: 0.95
truth: 1
predictors: [discriminative]
checkpoints: [10, 100, 500]
)";

const char* const kDiscriminativeRegression = R"(name: discriminative-regression
seed: 1
trajectories: 100
length: 64
rl:
  environments:
    - {kind: function, table: [0, 0, 0, 0], observations: 2}
    - {kind: function, table: [1, 0, 0, 0], observations: 2}
    - {kind: function, table: [0, 1, 0, 0], observations: 2}
    - {kind: function, table: [1, 1, 0, 0], observations: 2}
    - {kind: function, table: [0, 0, 1, 0], observations: 2}
    - {kind: function, table: [1, 0, 1, 0], observations: 2}
    - {kind: function, table: [0, 1, 1, 0], observations: 2}
    - {kind: function, table: [1, 1, 1, 0], observations: 2}
    - {kind: function, table: [0, 0, 0, 1], observations: 2}
    - {kind: function, table: [1, 0, 0, 1], observations: 2}
    - {kind: function, table: [0, 1, 0, 1], observations: 2}
    - {kind: function, table: [1, 1, 0, 1], observations: 2}
    - {kind: function, table: [0, 0, 1, 1], observations: 2}
    - {kind: function, table: [1, 0, 1, 1], observations: 2}
    - {kind: function, table: [0, 1, 1, 1], observations: 2}
    - {kind: function, table: [1, 1, 1, 1], observations: 2}
  complexity: two-log
  policy: {kind: uniform}
  gamma: 0.5
  tolerance: 0.001
  rollouts: 200
  value_steps: [0, 4, 16, 64]
truth: 11
predictors: [discriminative]
checkpoints: [4, 16, 64]
)";

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> kScenarios = {
      {"det-elimination", "elimination on Q_i = 1^{3i} 0^inf, m = 4, with 3-step and 1-step lookahead",
       kDetElimination},
      {"det-elimination-h1", "elimination on Q_i = 1^i 0^inf, m = 4", kDetEliminationH1},
      {"det-majority", "weighted majority and sampled Bayes on the 63 six-digit binary expansions", kDetMajority},
      {"bernoulli-pair", "MDL and Bayes on {Bern(1/2), Bern(3/4)}", kBernoulliPair},
      {"markov-class", "MDL over i.i.d., first- and second-order chains", kMarkovClass},
      {"trouble-osc", "oscillating Bernoulli against Bern(1/2): prediction without identification", kTroubleOsc},
      {"branching-nonergodic", "first symbol picks the future; the branches differ only after a 0", kBranching},
      {"rl-two-env", "discriminative MDL between two reward environments; value gap", kRlTwoEnv},
      {"discriminative-regression", "identifying f: 4 actions -> 2 observations by probing", kDiscriminativeRegression},
  };
  return kScenarios;
}

const Scenario* find_scenario(const std::string& name) {
  for (const auto& s : builtin_scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ExperimentConfig scenario_config(const std::string& name) {
  const Scenario* s = find_scenario(name);
  if (!s) throw ConfigError(name, "unknown scenario; see `mdlp list-scenarios`");
  return parse_config(yaml_to_json(s->yaml));
}

}  // namespace mdlp
