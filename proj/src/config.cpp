#include "mdlp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "mdlp/errors.hpp"

namespace mdlp {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::size_t as_size(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer()) {
    if (j.get<long long>() < 0) throw ConfigError(path, "must be non-negative");
    return static_cast<std::size_t>(j.get<long long>());
  }
  throw ConfigError(path, "expected a non-negative integer");
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <class T, class F>
std::vector<T> as_list(const json& j, const std::string& path, F&& item) {
  if (!j.is_array()) throw ConfigError(path, "expected a list");
  std::vector<T> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], index_path(path, i)));
  return out;
}

std::vector<double> as_doubles(const json& j, const std::string& path) { return as_list<double>(j, path, as_double); }
std::vector<std::size_t> as_sizes(const json& j, const std::string& path) { return as_list<std::size_t>(j, path, as_size); }

// Object accessor that remembers which keys were read so that unknown keys
// (usually typos) can be reported.
class Object {
 public:
  Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ConfigError(at(key), "required field is missing");
    return *v;
  }
  std::string at(const std::string& key) const { return join(path_, key); }

  std::size_t size(const std::string& key, std::size_t fallback) {
    const json* v = find(key);
    return v ? as_size(*v, at(key)) : fallback;
  }
  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_double(*v, at(key)) : fallback;
  }
  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    return v ? as_string(*v, at(key)) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v->get<bool>();
  }
  std::vector<double> doubles(const std::string& key) {
    const json* v = find(key);
    return v ? as_doubles(*v, at(key)) : std::vector<double>{};
  }
  std::vector<std::size_t> sizes(const std::string& key) {
    const json* v = find(key);
    return v ? as_sizes(*v, at(key)) : std::vector<std::size_t>{};
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-raises construction errors from the measure builders with the config path in front.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const InvalidSpec& e) {
    throw ConfigError(join(path, e.field()), std::string(e.what()).substr(e.field().size() + 2));
  }
}

json probabilities_json(const std::vector<double>& p) { return json(p); }

ComplexityAssignment parse_complexity(Object& o, const std::string& default_rule) {
  const std::string rule = o.string("complexity", default_rule);
  if (rule == "two-log") return ComplexityAssignment::two_log();
  if (rule == "uniform") return ComplexityAssignment::uniform();
  if (rule == "explicit") {
    auto bits = o.doubles("codelengths");
    if (bits.empty()) throw ConfigError(o.at("codelengths"), "required when complexity is explicit");
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!(bits[i] >= 0.0)) throw ConfigError(index_path(o.at("codelengths"), i), "must be non-negative");
    }
    return ComplexityAssignment::explicit_bits(std::move(bits));
  }
  throw ConfigError(o.at("complexity"), "expected two-log, uniform or explicit");
}

void complexity_json(json& out, const ComplexityAssignment& c) {
  switch (c.rule) {
    case ComplexityRule::two_log:
      out["complexity"] = "two-log";
      break;
    case ComplexityRule::uniform:
      out["complexity"] = "uniform";
      break;
    case ComplexityRule::explicit_list:
      out["complexity"] = "explicit";
      out["codelengths"] = c.bits;
      break;
  }
}

GeneratorConfig parse_generator(const json& j, const std::string& path) {
  Object o(j, path);
  GeneratorConfig g;
  g.kind = as_string(o.require("kind"), o.at("kind"));
  if (g.kind == "ones-then-zeros") {
    g.block = o.size("block", 1);
    g.size = o.size("size", 4);
    if (g.block == 0) throw ConfigError(o.at("block"), "must be at least 1");
    if (g.size == 0) throw ConfigError(o.at("size"), "must be at least 1");
  } else if (g.kind == "binary-expansion") {
    g.digits = o.size("digits", 6);
    if (g.digits == 0 || g.digits > 20) throw ConfigError(o.at("digits"), "must lie in 1..20");
  } else if (g.kind != "bernoulli-grid") {
    throw ConfigError(o.at("kind"), "expected ones-then-zeros, binary-expansion or bernoulli-grid");
  }
  o.finish();
  return g;
}

json generator_json(const GeneratorConfig& g) {
  json j{{"kind", g.kind}};
  if (g.kind == "ones-then-zeros") {
    j["block"] = g.block;
    j["size"] = g.size;
  } else if (g.kind == "binary-expansion") {
    j["digits"] = g.digits;
  }
  return j;
}

ClassConfig parse_class(const json& j, const std::string& path) {
  Object o(j, path);
  ClassConfig c;
  const json* models = o.find("models");
  const json* generator = o.find("generator");
  if (!models == !generator) throw ConfigError(path, "exactly one of models or generator is required");
  if (models) {
    c.models = as_list<FamilySpec>(*models, o.at("models"), family_from_json);
    if (c.models.empty()) throw ConfigError(o.at("models"), "class must contain at least one model");
  } else {
    c.generator = parse_generator(*generator, o.at("generator"));
  }
  c.complexity = parse_complexity(o, "two-log");
  c.cutoff = o.size("cutoff", kDefaultCutoff);
  if (c.cutoff == 0) throw ConfigError(o.at("cutoff"), "must be at least 1");
  c.kraft_bound = o.number("kraft_bound", kDefaultKraftBound);
  if (!(c.kraft_bound > 0.0)) throw ConfigError(o.at("kraft_bound"), "must be positive");
  o.finish();
  return c;
}

json class_json(const ClassConfig& c) {
  json j;
  if (c.generator) {
    j["generator"] = generator_json(*c.generator);
    if (c.generator->kind == "bernoulli-grid") j["cutoff"] = c.cutoff;
  } else {
    json models = json::array();
    for (const auto& m : c.models) models.push_back(family_to_json(m));
    j["models"] = std::move(models);
  }
  complexity_json(j, c.complexity);
  j["kraft_bound"] = c.kraft_bound;
  return j;
}

EnvironmentConfig parse_environment(const json& j, const std::string& path) {
  Object o(j, path);
  EnvironmentConfig e;
  e.kind = as_string(o.require("kind"), o.at("kind"));
  if (e.kind == "action-reward") {
    e.reward_prob = as_doubles(o.require("reward_prob"), o.at("reward_prob"));
  } else if (e.kind == "parity") {
    e.p_even = o.number("p_even", 0.5);
    e.p_odd = o.number("p_odd", 0.5);
  } else if (e.kind == "function") {
    e.table = as_sizes(o.require("table"), o.at("table"));
    e.observations = o.size("observations", 2);
  } else {
    throw ConfigError(o.at("kind"), "expected action-reward, parity or function");
  }
  o.finish();
  with_path(path, [&] { return make_environment(e); });
  return e;
}

json environment_json(const EnvironmentConfig& e) {
  json j{{"kind", e.kind}};
  if (e.kind == "action-reward") j["reward_prob"] = e.reward_prob;
  if (e.kind == "parity") {
    j["p_even"] = e.p_even;
    j["p_odd"] = e.p_odd;
  }
  if (e.kind == "function") {
    j["table"] = e.table;
    j["observations"] = e.observations;
  }
  return j;
}

PolicyConfig parse_policy(const json& j, const std::string& path) {
  Object o(j, path);
  PolicyConfig p;
  p.kind = o.string("kind", "uniform");
  if (p.kind == "stochastic") {
    p.probs = as_doubles(o.require("probs"), o.at("probs"));
  } else if (p.kind == "scripted") {
    p.script = as_sizes(o.require("script"), o.at("script"));
  } else if (p.kind != "uniform") {
    throw ConfigError(o.at("kind"), "expected uniform, stochastic or scripted");
  }
  o.finish();
  return p;
}

json policy_json(const PolicyConfig& p) {
  json j{{"kind", p.kind}};
  if (p.kind == "stochastic") j["probs"] = p.probs;
  if (p.kind == "scripted") j["script"] = p.script;
  return j;
}

RlConfig parse_rl(const json& j, const std::string& path, std::size_t length) {
  Object o(j, path);
  RlConfig r;
  r.environments = as_list<EnvironmentConfig>(o.require("environments"), o.at("environments"), parse_environment);
  if (r.environments.empty()) throw ConfigError(o.at("environments"), "need at least one environment");
  r.complexity = parse_complexity(o, "two-log");
  if (const json* p = o.find("policy")) r.policy = parse_policy(*p, o.at("policy"));
  r.gamma = o.number("gamma", 0.5);
  if (!(r.gamma > 0.0 && r.gamma < 1.0)) throw ConfigError(o.at("gamma"), "must lie in (0,1)");
  r.tolerance = o.number("tolerance", 1e-3);
  if (!(r.tolerance > 0.0)) throw ConfigError(o.at("tolerance"), "must be positive");
  r.horizon = o.size("horizon", 0);
  r.rollouts = o.size("rollouts", 1000);
  if (r.rollouts == 0) throw ConfigError(o.at("rollouts"), "must be at least 1");
  r.value_steps = o.sizes("value_steps");
  if (r.value_steps.empty()) r.value_steps = {length};
  std::sort(r.value_steps.begin(), r.value_steps.end());
  r.value_steps.erase(std::unique(r.value_steps.begin(), r.value_steps.end()), r.value_steps.end());
  if (r.value_steps.back() > length) throw ConfigError(o.at("value_steps"), "steps must not exceed length");
  r.gap_tolerance = o.number("gap_tolerance", 0.05);
  r.gap_quantile = o.number("gap_quantile", 0.95);
  if (!(r.gap_quantile > 0.0 && r.gap_quantile <= 1.0)) throw ConfigError(o.at("gap_quantile"), "must lie in (0,1]");
  o.finish();

  const auto first = make_environment(r.environments.front());
  for (std::size_t i = 1; i < r.environments.size(); ++i) {
    const auto e = make_environment(r.environments[i]);
    if (e->num_actions() != first->num_actions() || e->num_percepts() != first->num_percepts()) {
      throw ConfigError(index_path(o.at("environments"), i), "action or percept set differs from environments[0]");
    }
  }
  with_path(path, [&] { return build_policy(r); });
  with_path(path, [&] { return build_environment_class(r); });
  return r;
}

json rl_json(const RlConfig& r) {
  json envs = json::array();
  for (const auto& e : r.environments) envs.push_back(environment_json(e));
  json j{{"environments", envs},
         {"policy", policy_json(r.policy)},
         {"gamma", r.gamma},
         {"horizon", r.effective_horizon()},
         {"rollouts", r.rollouts},
         {"value_steps", r.value_steps},
         {"gap_tolerance", r.gap_tolerance},
         {"gap_quantile", r.gap_quantile}};
  complexity_json(j, r.complexity);
  return j;
}

PredictorConfig parse_predictor(const json& j, const std::string& path) {
  PredictorConfig p;
  if (j.is_string()) {
    const auto kind = parse_predictor_kind(j.get<std::string>());
    if (!kind) throw ConfigError(path, "unknown predictor '" + j.get<std::string>() + "'");
    p.kind = *kind;
  } else {
    Object o(j, path);
    const std::string k = as_string(o.require("kind"), o.at("kind"));
    const auto kind = parse_predictor_kind(k);
    if (!kind) throw ConfigError(o.at("kind"), "unknown predictor '" + k + "'");
    p.kind = *kind;
    p.h = o.size("h", 1);
    if (p.h == 0) throw ConfigError(o.at("h"), "must be at least 1");
    p.name = o.string("name", "");
    o.finish();
  }
  if (p.name.empty()) p.name = p.h > 1 ? to_string(p.kind) + "-h" + std::to_string(p.h) : to_string(p.kind);
  return p;
}

json predictor_json(const PredictorConfig& p) { return json{{"kind", to_string(p.kind)}, {"h", p.h}, {"name", p.name}}; }

std::uint64_t parse_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  throw ConfigError(path, "expected a non-negative integer");
}

// Rationals p/q in (0,1) in lowest terms, ordered by q then p.
std::vector<double> bernoulli_grid(std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t q = 2; out.size() < n; ++q) {
    for (std::size_t p = 1; p < q && out.size() < n; ++p) {
      if (std::gcd(p, q) == 1) out.push_back(static_cast<double>(p) / static_cast<double>(q));
    }
  }
  return out;
}

json yaml_node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (s == "~" || s == "null" || s.empty()) return nullptr;
      if (s == "true") return true;
      if (s == "false") return false;
      static const std::regex integer(R"([-+]?[0-9]+)");
      if (std::regex_match(s, integer)) {
        errno = 0;
        if (s[0] == '-') {
          const long long v = std::strtoll(s.c_str(), nullptr, 10);
          if (errno == 0) return v;
        } else {
          const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
          if (errno == 0) return v;
        }
      }
      static const std::regex real(R"([-+]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][-+]?[0-9]+)?)");
      if (std::regex_match(s, real)) return std::strtod(s.c_str(), nullptr);
      return s;
    }
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_node_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

}  // namespace

rl::EnvironmentPtr make_environment(const EnvironmentConfig& e) {
  if (e.kind == "action-reward") return rl::make_action_reward_env(e.reward_prob);
  if (e.kind == "parity") return rl::make_parity_env(e.p_even, e.p_odd);
  return rl::make_function_env(e.table, e.observations);
}

std::string to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::mdl:
      return "mdl";
    case PredictorKind::map:
      return "map";
    case PredictorKind::bayes:
      return "bayes";
    case PredictorKind::mdli:
      return "mdli";
    case PredictorKind::elimination:
      return "elimination";
    case PredictorKind::majority:
      return "majority";
    case PredictorKind::bayes_sampled:
      return "bayes-sampled";
    case PredictorKind::discriminative:
      return "discriminative";
  }
  return "mdl";
}

std::optional<PredictorKind> parse_predictor_kind(const std::string& s) {
  for (auto k : {PredictorKind::mdl, PredictorKind::map, PredictorKind::bayes, PredictorKind::mdli,
                 PredictorKind::elimination, PredictorKind::majority, PredictorKind::bayes_sampled,
                 PredictorKind::discriminative}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::size_t RlConfig::effective_horizon() const {
  return horizon > 0 ? horizon : rl::horizon_for_tolerance(gamma, tolerance);
}

FamilySpec family_from_json(const json& j, const std::string& path) {
  Object o(j, path);
  const std::string kind = as_string(o.require("kind"), o.at("kind"));
  FamilySpec spec;
  if (kind == "bernoulli") {
    spec = FamilySpec::bernoulli(as_double(o.require("theta"), o.at("theta")));
  } else if (kind == "categorical") {
    spec = {CategoricalSpec{as_doubles(o.require("probs"), o.at("probs"))}};
  } else if (kind == "deterministic") {
    DeterministicSpec d;
    d.alphabet = o.size("alphabet", 2);
    for (auto s : o.sizes("prefix")) d.prefix.push_back(static_cast<Symbol>(s));
    d.tail = static_cast<Symbol>(o.size("tail", 0));
    spec = {d};
  } else if (kind == "markov") {
    MarkovSpec m;
    m.order = o.size("order", 1);
    m.rows = as_list<std::vector<double>>(o.require("rows"), o.at("rows"), as_doubles);
    m.initial = o.doubles("initial");
    spec = {m};
  } else if (kind == "oscillating") {
    OscillatingBernoulliSpec s;
    s.limit = o.number("limit", s.limit);
    s.amplitude = o.number("amplitude", s.amplitude);
    s.floor = o.number("floor", s.floor);
    spec = {s};
  } else if (kind == "branching") {
    BranchingSpec b;
    b.first = as_doubles(o.require("first"), o.at("first"));
    b.branches = as_list<FamilySpec>(o.require("branches"), o.at("branches"), family_from_json);
    spec = {b};
  } else {
    throw ConfigError(o.at("kind"), "expected bernoulli, categorical, deterministic, markov, oscillating or branching");
  }
  o.finish();
  with_path(path, [&] { return build_family(spec); });
  return spec;
}

json family_to_json(const FamilySpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DeterministicSpec>) {
          return json{{"kind", "deterministic"}, {"alphabet", s.alphabet}, {"prefix", s.prefix}, {"tail", s.tail}};
        } else if constexpr (std::is_same_v<T, CategoricalSpec>) {
          return json{{"kind", "categorical"}, {"probs", probabilities_json(s.probs)}};
        } else if constexpr (std::is_same_v<T, MarkovSpec>) {
          return json{{"kind", "markov"}, {"order", s.order}, {"rows", s.rows}, {"initial", s.initial}};
        } else if constexpr (std::is_same_v<T, OscillatingBernoulliSpec>) {
          return json{{"kind", "oscillating"}, {"limit", s.limit}, {"amplitude", s.amplitude}, {"floor", s.floor}};
        } else {
          json branches = json::array();
          for (const auto& b : s.branches) branches.push_back(family_to_json(b));
          return json{{"kind", "branching"}, {"first", s.first}, {"branches", branches}};
        }
      },
      spec.params);
}

ExperimentConfig parse_config(const json& doc) {
  Object o(doc, "");
  ExperimentConfig cfg;
  cfg.name = o.string("name", cfg.name);
  if (const json* s = o.find("seed")) cfg.seed = parse_seed(*s, "seed");
  cfg.trajectories = o.size("trajectories", cfg.trajectories);
  if (cfg.trajectories == 0) throw ConfigError("trajectories", "must be at least 1");
  cfg.length = o.size("length", cfg.length);
  if (const json* j = o.find("jobs")) {
    if (!j->is_number_integer() || j->get<long long>() < 0) throw ConfigError("jobs", "expected a non-negative integer");
    cfg.jobs = static_cast<int>(j->get<long long>());
  }

  const json* cls = o.find("class");
  const json* rl = o.find("rl");
  if (!cls == !rl) throw ConfigError("<root>", "exactly one of class or rl is required");
  if (cls) cfg.model_class = parse_class(*cls, "class");
  if (rl) cfg.rl = parse_rl(*rl, "rl", cfg.length);

  cfg.truth = o.size("truth", 1);
  if (const json* lr = o.find("log_ratio_model")) cfg.log_ratio_model = as_size(*lr, "log_ratio_model");

  if (const json* preds = o.find("predictors")) {
    cfg.predictors = as_list<PredictorConfig>(*preds, "predictors", parse_predictor);
  }
  if (cfg.predictors.empty()) {
    cfg.predictors.push_back(parse_predictor(json(cfg.is_rl() ? "discriminative" : "mdl"), "predictors[0]"));
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < cfg.predictors.size(); ++i) {
    const auto& p = cfg.predictors[i];
    const std::string path = index_path("predictors", i);
    if (!names.insert(p.name).second) throw ConfigError(path, "duplicate predictor name '" + p.name + "'");
    if (cfg.is_rl() != (p.kind == PredictorKind::discriminative)) {
      throw ConfigError(path, cfg.is_rl() ? "rl experiments support only the discriminative predictor"
                                          : "the discriminative predictor needs an rl section");
    }
    if ((p.kind == PredictorKind::majority || p.kind == PredictorKind::bayes_sampled ||
         p.kind == PredictorKind::discriminative) &&
        p.h != 1) {
      throw ConfigError(join(path, "h"), "this predictor has no lookahead; h must be 1");
    }
  }

  cfg.checkpoints = o.sizes("checkpoints");
  if (cfg.checkpoints.empty()) cfg.checkpoints = {cfg.length / 20, cfg.length / 4, cfg.length};
  std::sort(cfg.checkpoints.begin(), cfg.checkpoints.end());
  cfg.checkpoints.erase(std::unique(cfg.checkpoints.begin(), cfg.checkpoints.end()), cfg.checkpoints.end());
  if (cfg.checkpoints.back() > cfg.length) throw ConfigError("checkpoints", "steps must not exceed length");

  if (const json* e = o.find("estimator")) {
    Object eo(*e, "estimator");
    cfg.estimator.budget = eo.size("budget", cfg.estimator.budget);
    cfg.estimator.mc_samples = eo.size("mc_samples", cfg.estimator.mc_samples);
    cfg.estimator.stride = eo.size("stride", cfg.estimator.stride);
    if (cfg.estimator.mc_samples == 0) throw ConfigError("estimator.mc_samples", "must be at least 1");
    if (cfg.estimator.stride == 0) throw ConfigError("estimator.stride", "must be at least 1");
    eo.finish();
  }
  if (const json* e = o.find("expect")) {
    Object eo(*e, "expect");
    if (const json* v = eo.find("dh_median_below")) cfg.expect.dh_median_below = as_double(*v, eo.at("dh_median_below"));
    cfg.expect.final_window = eo.boolean("final_window", false);
    cfg.expect.monotone_checkpoints = eo.boolean("monotone_checkpoints", false);
    if (const json* v = eo.find("min_mean_flips")) cfg.expect.min_mean_flips = as_double(*v, eo.at("min_mean_flips"));
    eo.finish();
  }
  if (const json* out = o.find("output")) {
    Object oo(*out, "output");
    cfg.output.records = oo.string("records", cfg.output.records);
    cfg.output.summary = oo.string("summary", cfg.output.summary);
    cfg.output.values = oo.string("values", cfg.output.values);
    oo.finish();
  }
  o.finish();

  // Semantic checks that need the class.
  const std::size_t size = cfg.is_rl() ? cfg.rl->environments.size() : build_model_class(cfg).size();
  if (cfg.truth < 1 || cfg.truth > size) {
    throw ConfigError("truth", "must lie in 1.." + std::to_string(size));
  }
  if (cfg.log_ratio_model && (*cfg.log_ratio_model < 1 || *cfg.log_ratio_model > size)) {
    throw ConfigError("log_ratio_model", "must lie in 1.." + std::to_string(size));
  }
  return cfg;
}

nlohmann::json yaml_to_json(const std::string& text) {
  try {
    return yaml_node_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<file>", std::string("YAML syntax error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(yaml_to_json(buffer.str()));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

json canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["trajectories"] = cfg.trajectories;
  j["length"] = cfg.length;
  if (cfg.model_class) j["class"] = class_json(*cfg.model_class);
  if (cfg.rl) j["rl"] = rl_json(*cfg.rl);
  j["truth"] = cfg.truth;
  if (cfg.log_ratio_model) j["log_ratio_model"] = *cfg.log_ratio_model;
  json preds = json::array();
  for (const auto& p : cfg.predictors) preds.push_back(predictor_json(p));
  j["predictors"] = preds;
  j["checkpoints"] = cfg.checkpoints;
  j["estimator"] = {{"budget", cfg.estimator.budget},
                    {"mc_samples", cfg.estimator.mc_samples},
                    {"stride", cfg.estimator.stride}};
  json expect = json::object();
  if (cfg.expect.dh_median_below) expect["dh_median_below"] = *cfg.expect.dh_median_below;
  expect["final_window"] = cfg.expect.final_window;
  expect["monotone_checkpoints"] = cfg.expect.monotone_checkpoints;
  if (cfg.expect.min_mean_flips) expect["min_mean_flips"] = *cfg.expect.min_mean_flips;
  j["expect"] = expect;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string run_id(const ExperimentConfig& cfg) { return cfg.name + "-" + config_hash(cfg).substr(0, 8); }

ModelClass build_model_class(const ExperimentConfig& cfg) {
  if (!cfg.model_class) throw ConfigError("class", "experiment has no model class");
  const ClassConfig& c = *cfg.model_class;
  return with_path("class", [&] {
    if (!c.generator) {
      std::vector<MeasurePtr> models;
      for (std::size_t i = 0; i < c.models.size(); ++i) {
        models.push_back(with_path(index_path("models", i), [&] { return build_family(c.models[i]); }));
      }
      return ModelClass::from_list(std::move(models), c.complexity, c.kraft_bound);
    }
    const GeneratorConfig& g = *c.generator;
    if (g.kind == "ones-then-zeros") {
      std::vector<MeasurePtr> models;
      for (std::size_t i = 1; i <= g.size; ++i) models.push_back(build_family(ones_then_zeros(i * g.block)));
      return ModelClass::from_list(std::move(models), c.complexity, c.kraft_bound);
    }
    if (g.kind == "binary-expansion") {
      std::vector<MeasurePtr> models;
      const std::size_t n = (std::size_t{1} << g.digits) - 1;
      for (std::size_t k = 1; k <= n; ++k) models.push_back(build_family(binary_expansion(k, g.digits)));
      return ModelClass::from_list(std::move(models), c.complexity, c.kraft_bound);
    }
    auto grid = std::make_shared<std::vector<double>>(bernoulli_grid(c.cutoff));
    return ModelClass::from_generator(
        [grid](std::size_t i) { return build_family(FamilySpec::bernoulli((*grid)[i - 1])); }, c.cutoff,
        c.complexity, c.kraft_bound);
  });
}

rl::EnvironmentClass build_environment_class(const RlConfig& cfg) {
  std::vector<rl::EnvironmentPtr> envs;
  for (const auto& e : cfg.environments) envs.push_back(make_environment(e));
  return rl::make_environment_class(std::move(envs), cfg.complexity);
}

rl::PolicyPtr build_policy(const RlConfig& cfg) {
  const std::size_t actions = make_environment(cfg.environments.front())->num_actions();
  rl::PolicyPtr p;
  if (cfg.policy.kind == "uniform") p = rl::make_uniform_policy(actions);
  if (cfg.policy.kind == "stochastic") p = rl::make_stochastic_policy(cfg.policy.probs);
  if (cfg.policy.kind == "scripted") p = rl::make_scripted_policy(cfg.policy.script, actions);
  if (p->num_actions() != actions) throw InvalidSpec("policy", "number of actions differs from the environments");
  return p;
}

}  // namespace mdlp
