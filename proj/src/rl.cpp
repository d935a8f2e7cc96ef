#include "mdlp/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mdlp/errors.hpp"
#include "mdlp/kernels.hpp"

namespace mdlp::rl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probability(double p, const std::string& field) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec(field, "probability must lie in [0,1]");
}

class ActionRewardEnv final : public Environment {
 public:
  explicit ActionRewardEnv(std::vector<double> p) : p_(std::move(p)) {}
  std::size_t num_actions() const override { return p_.size(); }
  std::size_t num_observations() const override { return 1; }
  void percept_distribution(IndexView, IndexView actions, std::span<double> out) const override {
    const double p = p_[actions.back()];
    out[0] = 1.0 - p;
    out[1] = p;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "ActionReward(";
    for (std::size_t a = 0; a < p_.size(); ++a) os << (a ? "," : "") << p_[a];
    os << ')';
    return os.str();
  }

 private:
  std::vector<double> p_;
};

class ParityEnv final : public Environment {
 public:
  ParityEnv(double even, double odd) : even_(even), odd_(odd) {}
  std::size_t num_actions() const override { return 2; }
  std::size_t num_observations() const override { return 1; }
  void percept_distribution(IndexView, IndexView actions, std::span<double> out) const override {
    const auto ones = std::count(actions.begin(), actions.end(), Index{1});
    const double p = ones % 2 == 0 ? even_ : odd_;
    out[0] = 1.0 - p;
    out[1] = p;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Parity(" << even_ << ',' << odd_ << ')';
    return os.str();
  }

 private:
  double even_, odd_;
};

class FunctionEnv final : public Environment {
 public:
  FunctionEnv(std::vector<Index> table, std::size_t observations)
      : table_(std::move(table)), observations_(observations) {}
  std::size_t num_actions() const override { return table_.size(); }
  std::size_t num_observations() const override { return observations_; }
  void percept_distribution(IndexView, IndexView actions, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const Index o = table_[actions.back()];
    out[encode(o, o + 1 == observations_ ? 1 : 0)] = 1.0;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Function(";
    for (std::size_t a = 0; a < table_.size(); ++a) os << (a ? "," : "") << table_[a];
    os << ')';
    return os.str();
  }

 private:
  std::vector<Index> table_;
  std::size_t observations_;
};

class StochasticPolicy final : public Policy {
 public:
  explicit StochasticPolicy(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::size_t num_actions() const override { return probs_.size(); }
  void action_distribution(IndexView, IndexView, std::span<double> out) const override {
    std::copy(probs_.begin(), probs_.end(), out.begin());
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Stochastic(";
    for (std::size_t a = 0; a < probs_.size(); ++a) os << (a ? "," : "") << probs_[a];
    os << ')';
    return os.str();
  }

 private:
  std::vector<double> probs_;
};

class ScriptedPolicy final : public Policy {
 public:
  ScriptedPolicy(std::vector<Index> script, std::size_t actions) : script_(std::move(script)), actions_(actions) {}
  std::size_t num_actions() const override { return actions_; }
  void action_distribution(IndexView, IndexView past_actions, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[script_[past_actions.size() % script_.size()]] = 1.0;
  }
  std::string describe() const override { return "Scripted"; }

 private:
  std::vector<Index> script_;
  std::size_t actions_;
};

// Sum of log2 nu(x_t | ...) over the history.
double log_likelihood(const Environment& env, IndexView percepts, IndexView actions) {
  std::vector<double> dist(env.num_percepts());
  double bits = 0.0;
  for (std::size_t t = 0; t < percepts.size(); ++t) {
    env.percept_distribution(percepts.first(t), actions.first(t + 1), dist);
    const double p = dist[percepts[t]];
    if (p <= 0.0) return -kInf;
    bits += std::log2(p);
  }
  return bits;
}

void check_history(const Environment& env, const InteractionHistory& hist) {
  if (hist.actions.size() != hist.percepts.size()) {
    throw std::invalid_argument("interaction history must end with a complete cycle");
  }
  for (Index a : hist.actions) {
    if (a >= env.num_actions()) throw std::invalid_argument("action outside the environment's action set");
  }
  for (Index x : hist.percepts) {
    if (x >= env.num_percepts()) throw std::invalid_argument("percept outside the environment's percept set");
  }
}

}  // namespace

const std::vector<double>& Environment::reward_levels() const {
  static const std::vector<double> kBinary{0.0, 1.0};
  return kBinary;
}

EnvironmentPtr make_action_reward_env(std::vector<double> reward_prob) {
  if (reward_prob.empty()) throw InvalidSpec("environment.reward_prob", "need at least one action");
  for (double p : reward_prob) check_probability(p, "environment.reward_prob");
  return std::make_shared<ActionRewardEnv>(std::move(reward_prob));
}

EnvironmentPtr make_parity_env(double p_even, double p_odd) {
  check_probability(p_even, "environment.p_even");
  check_probability(p_odd, "environment.p_odd");
  return std::make_shared<ParityEnv>(p_even, p_odd);
}

EnvironmentPtr make_function_env(std::vector<Index> table, std::size_t num_observations) {
  if (table.empty()) throw InvalidSpec("environment.table", "need at least one action");
  if (num_observations < 2) throw InvalidSpec("environment.observations", "need at least two observations");
  for (Index o : table) {
    if (o >= num_observations) throw InvalidSpec("environment.table", "observation out of range");
  }
  return std::make_shared<FunctionEnv>(std::move(table), num_observations);
}

PolicyPtr make_stochastic_policy(std::vector<double> probs) {
  if (probs.empty()) throw InvalidSpec("policy.probs", "need at least one action");
  for (double p : probs) check_probability(p, "policy.probs");
  if (std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0) > 1e-9) {
    throw InvalidSpec("policy.probs", "probabilities must sum to 1");
  }
  return std::make_shared<StochasticPolicy>(std::move(probs));
}

PolicyPtr make_uniform_policy(std::size_t num_actions) {
  if (num_actions == 0) throw InvalidSpec("policy.actions", "need at least one action");
  return make_stochastic_policy(std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions)));
}

PolicyPtr make_scripted_policy(std::vector<Index> script, std::size_t num_actions) {
  if (script.empty()) throw InvalidSpec("policy.script", "must not be empty");
  for (Index a : script) {
    if (a >= num_actions) throw InvalidSpec("policy.script", "action out of range");
  }
  return std::make_shared<ScriptedPolicy>(std::move(script), num_actions);
}

void interact_step(const Environment& env, const Policy& pol, InteractionHistory& hist, RandomStream& rng) {
  std::vector<double> act(pol.num_actions());
  pol.action_distribution(hist.percepts, hist.actions, act);
  hist.actions.push_back(rng.categorical(act));
  std::vector<double> dist(env.num_percepts());
  env.percept_distribution(hist.percepts, hist.actions, dist);
  const Index x = rng.categorical(dist);
  hist.percepts.push_back(x);
  hist.rewards.push_back(env.reward(x));
}

InteractionHistory interact(const Environment& env, const Policy& pol, std::size_t steps, RandomStream& rng) {
  if (pol.num_actions() != env.num_actions()) throw std::invalid_argument("policy and environment action sets differ");
  InteractionHistory hist;
  hist.actions.reserve(steps);
  hist.percepts.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) interact_step(env, pol, hist, rng);
  return hist;
}

void PerceptMeasure::predict(SequenceView x, std::span<double> out) const {
  std::vector<Index> percepts(x.begin(), x.end());
  std::vector<Index> actions(x.size() + 1, 0);
  env_->percept_distribution(percepts, actions, out);
}

EnvironmentClass make_environment_class(std::vector<EnvironmentPtr> envs, const ComplexityAssignment& rule,
                                        double kraft_bound) {
  if (envs.empty()) throw InvalidSpec("environments", "class must contain at least one environment");
  for (std::size_t i = 1; i < envs.size(); ++i) {
    if (envs[i]->num_actions() != envs[0]->num_actions() || envs[i]->num_percepts() != envs[0]->num_percepts()) {
      throw InvalidSpec("environments[" + std::to_string(i) + "]", "action or percept set differs from the first");
    }
  }
  EnvironmentClass c{std::move(envs), {}};
  c.codelengths = assign_codelengths(rule, c.environments.size());
  double mass = 0.0;
  for (double k : c.codelengths) mass += std::exp2(-k);
  if (mass > kraft_bound + 1e-12) throw InvalidSpec("complexity", "Kraft mass exceeds bound");
  return c;
}

double conditional_log_likelihood(const Environment& env, const InteractionHistory& hist) {
  check_history(env, hist);
  return log_likelihood(env, hist.percepts, hist.actions);
}

Selection discriminative_select(const EnvironmentClass& c, const InteractionHistory& hist) {
  Selection sel;
  sel.scores.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    sel.scores[i] = c.codelengths[i] - conditional_log_likelihood(*c.environments[i], hist);
  }
  sel.index = argmin_lowest_index(sel.scores);
  return sel;
}

double truncation_bound(double gamma, std::size_t horizon) {
  return std::pow(gamma, static_cast<double>(horizon)) / (1.0 - gamma);
}

std::size_t horizon_for_tolerance(double gamma, double tolerance) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in (0,1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  std::size_t t = 0;
  while (truncation_bound(gamma, t) > tolerance) ++t;
  return t;
}

std::vector<double> rollout_returns(const Environment& env, const Policy& pol, const InteractionHistory& hist,
                                    double gamma, std::size_t horizon, std::size_t n, std::uint64_t base_seed,
                                    kernels::Exec exec) {
  std::vector<double> returns(n, 0.0);
  kernels::for_each_index(
      n,
      [&](std::size_t k) {
        RandomStream rng(derive_seed(base_seed, k));
        InteractionHistory h;
        h.actions = hist.actions;
        h.percepts = hist.percepts;
        h.actions.reserve(hist.actions.size() + horizon);
        h.percepts.reserve(hist.percepts.size() + horizon);
        double discount = 1.0;
        kernels::CompensatedSum total;
        for (std::size_t step = 0; step < horizon; ++step) {
          interact_step(env, pol, h, rng);
          total.add(discount * h.rewards.back());
          discount *= gamma;
        }
        returns[k] = total.value();
      },
      exec);
  return returns;
}

namespace {

kernels::MomentSums moments_of(std::span<const double> values) {
  kernels::CompensatedSum sum, sum_sq;
  for (double v : values) {
    sum.add(v);
    sum_sq.add(v * v);
  }
  return {values.size(), sum.value(), sum_sq.value()};
}

void check_value_inputs(const Environment& env, const Policy& pol, const InteractionHistory& hist, double gamma,
                        std::size_t n) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in (0,1)");
  if (n == 0) throw std::invalid_argument("need at least one rollout");
  if (pol.num_actions() != env.num_actions()) throw std::invalid_argument("policy and environment action sets differ");
  if (conditional_log_likelihood(env, hist) == -kInf) {
    throw UndefinedConditional(env.describe() + " assigns probability zero to the interaction history");
  }
}

}  // namespace

ValueEstimate value_estimate(const Environment& env, const Policy& pol, const InteractionHistory& hist, double gamma,
                             std::size_t horizon, std::size_t n, RandomStream& rng) {
  check_value_inputs(env, pol, hist, gamma, n);
  const auto returns = rollout_returns(env, pol, hist, gamma, horizon, n, rng.next_u64());
  const auto m = moments_of(returns);
  return {m.mean(), gamma, horizon, truncation_bound(gamma, horizon), m.stderr_of_mean(), n};
}

namespace {

double exact_value(const Environment& env, const Policy& pol, std::vector<Index>& percepts,
                   std::vector<Index>& actions, double gamma, std::size_t remaining) {
  if (remaining == 0) return 0.0;
  std::vector<double> act(pol.num_actions());
  pol.action_distribution(percepts, actions, act);
  std::vector<double> dist(env.num_percepts());
  double value = 0.0;
  for (Index a = 0; a < act.size(); ++a) {
    if (act[a] <= 0.0) continue;
    actions.push_back(a);
    env.percept_distribution(percepts, actions, dist);
    const auto probs = dist;
    for (Index x = 0; x < probs.size(); ++x) {
      if (probs[x] <= 0.0) continue;
      percepts.push_back(x);
      value += act[a] * probs[x] * (env.reward(x) + gamma * exact_value(env, pol, percepts, actions, gamma, remaining - 1));
      percepts.pop_back();
    }
    actions.pop_back();
  }
  return value;
}

}  // namespace

double value_exact(const Environment& env, const Policy& pol, const InteractionHistory& hist, double gamma,
                   std::size_t horizon) {
  check_value_inputs(env, pol, hist, gamma, 1);
  std::vector<Index> percepts = hist.percepts;
  std::vector<Index> actions = hist.actions;
  return exact_value(env, pol, percepts, actions, gamma, horizon);
}

ValueGap value_gap(const EnvironmentClass& c, const Environment& truth, const Policy& pol,
                   const InteractionHistory& hist, double gamma, std::size_t horizon, std::size_t n,
                   RandomStream& rng) {
  const auto sel = discriminative_select(c, hist);
  const Environment& chosen = c.env(sel.index);
  check_value_inputs(truth, pol, hist, gamma, n);
  check_value_inputs(chosen, pol, hist, gamma, n);

  const std::uint64_t base = rng.next_u64();
  const auto r_sel = rollout_returns(chosen, pol, hist, gamma, horizon, n, base);
  const auto r_true = rollout_returns(truth, pol, hist, gamma, horizon, n, base);
  std::vector<double> diff(n);
  for (std::size_t k = 0; k < n; ++k) diff[k] = r_sel[k] - r_true[k];

  ValueGap g;
  g.selected = sel.index;
  g.value_selected = moments_of(r_sel).mean();
  g.value_true = moments_of(r_true).mean();
  g.gap = std::abs(g.value_selected - g.value_true);
  g.truncation_bound = truncation_bound(gamma, horizon);
  g.stderr_ = moments_of(diff).stderr_of_mean();
  return g;
}

}  // namespace mdlp::rl
