#pragma once

// Experiment configuration. Files are YAML (JSON is accepted too, being a
// subset); see README.md for the grammar. Every field has a default except
// the class (or rl) section. Validation errors carry a dotted field path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdlp/measures.hpp"
#include "mdlp/model_class.hpp"
#include "mdlp/rl.hpp"

namespace mdlp {

enum class PredictorKind { mdl, map, bayes, mdli, elimination, majority, bayes_sampled, discriminative };

std::string to_string(PredictorKind k);
std::optional<PredictorKind> parse_predictor_kind(const std::string& s);

struct PredictorConfig {
  PredictorKind kind = PredictorKind::mdl;
  std::size_t h = 1;
  std::string name;  // defaults to kind, or kind-h<h> when h > 1
};

// Generated classes:
//   ones-then-zeros   Q_i = 1^{i*block} 0^inf, i = 1..size
//   binary-expansion  all 2^digits - 1 nonzero expansions k / 2^digits
//   bernoulli-grid    Bern(p/q) for 0 < p < q, ordered by q then p; countably infinite
struct GeneratorConfig {
  std::string kind;
  std::size_t block = 1;
  std::size_t size = 4;
  std::size_t digits = 6;
};

struct ClassConfig {
  std::vector<FamilySpec> models;
  std::optional<GeneratorConfig> generator;
  ComplexityAssignment complexity;
  std::size_t cutoff = kDefaultCutoff;
  double kraft_bound = kDefaultKraftBound;
};

struct EnvironmentConfig {
  std::string kind;  // action-reward | parity | function
  std::vector<double> reward_prob;
  double p_even = 0.5;
  double p_odd = 0.5;
  std::vector<std::size_t> table;
  std::size_t observations = 2;
};

struct PolicyConfig {
  std::string kind = "uniform";  // uniform | stochastic | scripted
  std::vector<double> probs;
  std::vector<std::size_t> script;
};

struct RlConfig {
  std::vector<EnvironmentConfig> environments;
  ComplexityAssignment complexity;
  PolicyConfig policy;
  double gamma = 0.5;
  std::size_t horizon = 0;  // 0: smallest T meeting `tolerance`
  double tolerance = 1e-3;
  std::size_t rollouts = 1000;
  std::vector<std::size_t> value_steps;
  double gap_tolerance = 0.05;
  double gap_quantile = 0.95;

  std::size_t effective_horizon() const;
};

struct EstimatorConfig {
  std::size_t budget = 1 << 12;  // largest |X|^h enumerated exactly
  std::size_t mc_samples = 10000;
  std::size_t stride = 1;  // d_h is computed at steps divisible by stride (and at the last step)
};

// Optional expectations checked alongside the bounds.
struct ExpectConfig {
  std::optional<double> dh_median_below;  // median d_h across trajectories at the last step
  bool final_window = false;              // use the median over the last 10% of steps instead
  bool monotone_checkpoints = false;      // median d_h non-increasing over checkpoints, up to 4 stderr
  std::optional<double> min_mean_flips;   // mean number of selection changes per trajectory
};

struct OutputConfig {
  std::string records = "records.csv";
  std::string summary = "summary.json";
  std::string values = "values.csv";
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::size_t trajectories = 1000;
  std::size_t length = 1000;
  int jobs = 0;  // 0: MDLP_JOBS or the OpenMP default
  std::optional<ClassConfig> model_class;
  std::size_t truth = 1;
  std::optional<std::size_t> log_ratio_model;
  std::vector<PredictorConfig> predictors;
  std::vector<std::size_t> checkpoints;
  EstimatorConfig estimator;
  ExpectConfig expect;
  std::optional<RlConfig> rl;
  OutputConfig output;

  bool is_rl() const { return rl.has_value(); }
};

// Parses and validates a config document. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
// YAML text to JSON. Quoted scalars stay strings; plain scalars become
// numbers, booleans or null where they parse as such.
nlohmann::json yaml_to_json(const std::string& text);

// Normalized form with every default filled in and keys sorted. Excludes
// `jobs` and `output`, which do not influence results.
nlohmann::json canonical_json(const ExperimentConfig& cfg);
// FNV-1a 64-bit of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
std::string run_id(const ExperimentConfig& cfg);

nlohmann::json family_to_json(const FamilySpec& spec);
FamilySpec family_from_json(const nlohmann::json& j, const std::string& path);

ModelClass build_model_class(const ExperimentConfig& cfg);
rl::EnvironmentPtr make_environment(const EnvironmentConfig& e);
rl::EnvironmentClass build_environment_class(const RlConfig& cfg);
rl::PolicyPtr build_policy(const RlConfig& cfg);

}  // namespace mdlp
