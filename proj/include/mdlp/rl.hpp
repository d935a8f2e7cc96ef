#pragma once

// Agent-environment interaction with a fixed policy, discriminative MDL over a
// class of environments, and discounted value estimation.
//
// At cycle t the agent draws y_t ~ pi(. | x_<t y_<t) and the environment
// answers with a percept x_t ~ nu(. | x_<t y_1:t). A percept is the pair
// (observation, reward level), encoded as observation * levels + level.

#include <memory>
#include <string>
#include <vector>

#include "mdlp/measures.hpp"
#include "mdlp/model_class.hpp"
#include "mdlp/kernels.hpp"
#include "mdlp/predictors.hpp"
#include "mdlp/random.hpp"

namespace mdlp::rl {

using Index = std::size_t;
using IndexView = std::span<const Index>;

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t num_actions() const = 0;
  virtual std::size_t num_observations() const = 0;
  virtual const std::vector<double>& reward_levels() const;
  std::size_t num_percepts() const { return num_observations() * reward_levels().size(); }

  // Requires actions.size() == percepts.size() + 1. Implementations may look
  // at the whole history but never at actions beyond the current cycle.
  virtual void percept_distribution(IndexView percepts, IndexView actions, std::span<double> out) const = 0;
  virtual std::string describe() const = 0;

  double reward(Index percept) const { return reward_levels()[percept % reward_levels().size()]; }
  Index observation(Index percept) const { return percept / reward_levels().size(); }
  Index encode(Index observation, Index reward_level) const { return observation * reward_levels().size() + reward_level; }
};

using EnvironmentPtr = std::shared_ptr<const Environment>;

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t num_actions() const = 0;
  // Requires actions.size() == percepts.size().
  virtual void action_distribution(IndexView percepts, IndexView actions, std::span<double> out) const = 0;
  virtual std::string describe() const = 0;
};

using PolicyPtr = std::shared_ptr<const Policy>;

// Single observation; reward 1 with probability reward_prob[y_t], else 0.
EnvironmentPtr make_action_reward_env(std::vector<double> reward_prob);
// Reward 1 with probability p_even or p_odd depending on the parity of the
// number of times action 1 was taken in y_1:t. Not Markov in the percepts.
EnvironmentPtr make_parity_env(double p_even, double p_odd);
// Deterministic x_t = f(y_t): observation table[y_t]; reward 1 iff the
// observation is the largest one.
EnvironmentPtr make_function_env(std::vector<Index> table, std::size_t num_observations);

// Memoryless stochastic policy.
PolicyPtr make_stochastic_policy(std::vector<double> probs);
PolicyPtr make_uniform_policy(std::size_t num_actions);
// y_t = script[(t - 1) mod script.size()].
PolicyPtr make_scripted_policy(std::vector<Index> script, std::size_t num_actions);

struct InteractionHistory {
  std::vector<Index> actions;
  std::vector<Index> percepts;
  std::vector<double> rewards;

  std::size_t length() const { return percepts.size(); }
};

InteractionHistory interact(const Environment& env, const Policy& pol, std::size_t steps, RandomStream& rng);
// Appends one full cycle to hist.
void interact_step(const Environment& env, const Policy& pol, InteractionHistory& hist, RandomStream& rng);

// Adapter: an environment that ignores actions, viewed as a measure over percepts.
class PerceptMeasure final : public Measure {
 public:
  explicit PerceptMeasure(EnvironmentPtr env) : env_(std::move(env)) {}
  std::size_t alphabet_size() const override { return env_->num_percepts(); }
  void predict(SequenceView x, std::span<double> out) const override;
  std::string describe() const override { return env_->describe(); }

 private:
  EnvironmentPtr env_;
};

struct EnvironmentClass {
  std::vector<EnvironmentPtr> environments;
  std::vector<double> codelengths;

  std::size_t size() const { return environments.size(); }
  const Environment& env(std::size_t index) const { return *environments.at(index - 1); }
};

EnvironmentClass make_environment_class(std::vector<EnvironmentPtr> envs, const ComplexityAssignment& rule,
                                        double kraft_bound = kDefaultKraftBound);

// sum_t log2 nu(x_t | x_<t y_1:t); -inf when some percept is impossible.
double conditional_log_likelihood(const Environment& env, const InteractionHistory& hist);

// argmin_nu { -log2 nu(x | y) + K(nu) }, lowest index on ties.
Selection discriminative_select(const EnvironmentClass& c, const InteractionHistory& hist);

struct ValueEstimate {
  double value = 0.0;
  double gamma = 0.0;
  std::size_t horizon = 0;
  double truncation_bound = 0.0;  // gamma^T / (1 - gamma)
  double stderr_ = 0.0;
  std::size_t rollouts = 0;
};

double truncation_bound(double gamma, std::size_t horizon);
// Smallest T with gamma^T / (1 - gamma) <= tolerance.
std::size_t horizon_for_tolerance(double gamma, double tolerance);

// Discounted returns sum_{k<T} gamma^k r_{l+1+k} of n rollouts continuing
// hist; rollout k uses the substream derive_seed(base_seed, k).
std::vector<double> rollout_returns(const Environment& env, const Policy& pol, const InteractionHistory& hist,
                                    double gamma, std::size_t horizon, std::size_t n, std::uint64_t base_seed,
                                    kernels::Exec exec = kernels::Exec::parallel);

ValueEstimate value_estimate(const Environment& env, const Policy& pol, const InteractionHistory& hist, double gamma,
                             std::size_t horizon, std::size_t n, RandomStream& rng);

// Exact truncated value by enumerating every action/percept continuation.
// Exponential in the horizon; intended for small instances.
double value_exact(const Environment& env, const Policy& pol, const InteractionHistory& hist, double gamma,
                   std::size_t horizon);

struct ValueGap {
  double gap = 0.0;
  std::size_t selected = 0;
  double value_selected = 0.0;
  double value_true = 0.0;
  double truncation_bound = 0.0;
  double stderr_ = 0.0;  // of the paired difference
};

// |V_selected - V_truth|. Both estimates share rollout substreams, so a
// selected model equal to the truth gives a gap of exactly zero.
ValueGap value_gap(const EnvironmentClass& c, const Environment& truth, const Policy& pol,
                   const InteractionHistory& hist, double gamma, std::size_t horizon, std::size_t n,
                   RandomStream& rng);

}  // namespace mdlp::rl
