#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdlp/config.hpp"
#include "mdlp/errors.hpp"
#include "mdlp/scenarios.hpp"
#include "support.hpp"

using namespace mdlp;
using nlohmann::json;
using testsupport::Gen;

namespace {

const char* const kMinimal = R"(
name: tiny
class:
  models:
    - {kind: bernoulli, theta: 0.5}
    - {kind: bernoulli, theta: 0.75}
)";

ExperimentConfig parse_yaml(const std::string& text) { return parse_config(yaml_to_json(text)); }

// Path of the ConfigError thrown by parsing text, or "" if none.
std::string error_path(const std::string& text) {
  try {
    parse_yaml(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto cfg = parse_yaml(kMinimal);
  CHECK(cfg.name == "tiny");
  CHECK(cfg.seed == 1);
  CHECK(cfg.trajectories == 1000);
  CHECK(cfg.length == 1000);
  CHECK(cfg.truth == 1);
  REQUIRE(cfg.predictors.size() == 1);
  CHECK(cfg.predictors[0].kind == PredictorKind::mdl);
  CHECK(cfg.predictors[0].name == "mdl");
  CHECK(cfg.checkpoints == std::vector<std::size_t>{50, 250, 1000});
  CHECK(cfg.model_class->complexity.rule == ComplexityRule::two_log);
  CHECK(build_model_class(cfg).size() == 2);
  CHECK_FALSE(cfg.is_rl());
}

TEST_CASE("predictor names") {
  const auto cfg = parse_yaml(std::string(kMinimal) + R"(
predictors:
  - bayes
  - {kind: mdl, h: 4}
  - {kind: mdl, h: 4, name: second}
)");
  REQUIRE(cfg.predictors.size() == 3);
  CHECK(cfg.predictors[0].name == "bayes");
  CHECK(cfg.predictors[1].name == "mdl-h4");
  CHECK(cfg.predictors[2].name == "second");
  CHECK(error_path(std::string(kMinimal) + "predictors: [mdl, mdl]\n") == "predictors[1]");
  CHECK(error_path(std::string(kMinimal) + "predictors: [{kind: majority, h: 2}]\n") == "predictors[0].h");
  CHECK(error_path(std::string(kMinimal) + "predictors: [discriminative]\n") == "predictors[0]");
  CHECK(error_path(std::string(kMinimal) + "predictors: [oracle]\n").rfind("predictors[0]", 0) == 0);
}

TEST_CASE("validation errors carry the field path") {
  CHECK(error_path(std::string(kMinimal) + "truth: 3\n") == "truth");
  CHECK(error_path(std::string(kMinimal) + "trajectories: 0\n") == "trajectories");
  CHECK(error_path(std::string(kMinimal) + "colour: blue\n").find("colour") != std::string::npos);
  CHECK(error_path("name: x\n") == "<root>");
  CHECK(error_path(R"(
class:
  models:
    - {kind: bernoulli, theta: 0.5}
    - {kind: bernoulli, thta: 0.75}
)")
            .find("class.models[1]") != std::string::npos);
  CHECK(error_path(R"(
class:
  models:
    - {kind: bernoulli, theta: 0.5}
    - {kind: bernoulli, theta: 1.5}
)")
            .find("class") != std::string::npos);
  CHECK(error_path(R"(
class:
  models: [{kind: bernoulli, theta: 0.5}]
  complexity: explicit
  codelengths: [1, 2]
)") == "class.complexity.codelengths");
  CHECK(error_path(std::string(kMinimal) + "checkpoints: [5000]\n") == "checkpoints");
  CHECK(error_path(std::string(kMinimal) + "estimator: {stride: 0}\n") == "estimator.stride");
  CHECK(error_path(std::string(kMinimal) + "length: \"12\"\n") == "length");
  CHECK_THROWS_AS(yaml_to_json("a: [1, 2"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("yaml scalars") {
  const json j = yaml_to_json("a: 1\nb: 1.5\nc: \"1\"\nd: true\ne: ~\nf: [x, 2]\n");
  CHECK(j["a"].is_number_integer());
  CHECK(j["b"].get<double>() == 1.5);
  CHECK(j["c"].is_string());
  CHECK(j["d"].get<bool>());
  CHECK(j["e"].is_null());
  CHECK(j["f"][0] == "x");
}

TEST_CASE("config hash") {
  const auto a = parse_yaml(kMinimal);
  // same content: JSON syntax, reordered keys, defaults spelled out, output and jobs changed
  const auto b = parse_config(json::parse(R"({
    "jobs": 3,
    "output": {"records": "other.csv"},
    "class": {"complexity": "two-log", "models": [{"theta": 0.5, "kind": "bernoulli"},
                                                  {"kind": "bernoulli", "theta": 0.75}]},
    "seed": 1, "trajectories": 1000, "length": 1000, "predictors": ["mdl"], "name": "tiny"
  })"));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(run_id(a) == "tiny-" + config_hash(a).substr(0, 8));

  auto c = a;
  c.seed = 2;
  CHECK(config_hash(c) != config_hash(a));
  const auto d = parse_yaml(std::string(kMinimal) + "truth: 2\n");
  CHECK(config_hash(d) != config_hash(a));
  // canonical form reparses to the same hash
  CHECK(config_hash(parse_config(canonical_json(a))) == config_hash(a));
}

TEST_CASE("seed accepts full 64-bit values") {
  const auto cfg = parse_yaml(std::string(kMinimal) + "seed: 18446744073709551615\n");
  CHECK(cfg.seed == 18446744073709551615ULL);
}

TEST_CASE("property: family json round trip") {
  Gen g(701);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t alphabet = 2 + g.below(3);
    const FamilySpec spec = g.family(alphabet, 0.2);
    const json j = family_to_json(spec);
    const FamilySpec back = family_from_json(j, "m");
    CHECK(family_to_json(back) == j);
    const Sequence x = testsupport::reference_sample(spec, g.below(12), g);
    CHECK(testsupport::reference_prob(back, x) == testsupport::reference_prob(spec, x));
  }
}

TEST_CASE("generated classes") {
  auto cfg = parse_yaml(R"(
class:
  generator: {kind: ones-then-zeros, block: 3, size: 4}
truth: 4
)");
  auto c = build_model_class(cfg);
  REQUIRE(c.size() == 4);
  CHECK(log_marginal(c.model(2), Sequence{1, 1, 1, 1, 1, 1, 0}).bits() == 0.0);

  cfg = parse_yaml(R"(
class:
  generator: {kind: binary-expansion, digits: 6}
  complexity: uniform
)");
  c = build_model_class(cfg);
  CHECK(c.size() == 63);
  CHECK(c.codelength(1) == doctest::Approx(std::log2(63.0)));

  cfg = parse_yaml(R"(
class:
  generator: {kind: bernoulli-grid}
  cutoff: 50
)");
  c = build_model_class(cfg);
  CHECK(c.is_infinite());
  CHECK(c.size() == 50);
  // ordered by denominator then numerator: 1/2, 1/3, 2/3, 1/4, 3/4, ...
  const double want[] = {0.5, 1.0 / 3, 2.0 / 3, 0.25, 0.75, 0.2};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(predictive_distribution(c.model(i + 1), {})[1] == doctest::Approx(want[i]));
  }
}

TEST_CASE("rl section") {
  const auto cfg = parse_yaml(R"(
length: 100
rl:
  environments:
    - {kind: action-reward, reward_prob: [0.1, 0.9]}
    - {kind: parity, p_even: 0.2, p_odd: 0.6}
  policy: {kind: stochastic, probs: [0.3, 0.7]}
  gamma: 0.5
  value_steps: [0, 50, 100]
)");
  CHECK(cfg.is_rl());
  CHECK(cfg.predictors.front().kind == PredictorKind::discriminative);
  CHECK(cfg.rl->effective_horizon() == 11);
  const auto envs = build_environment_class(*cfg.rl);
  CHECK(envs.size() == 2);
  CHECK(build_policy(*cfg.rl)->num_actions() == 2);
  CHECK(error_path(R"(
rl:
  environments: [{kind: action-reward, reward_prob: [0.1, 0.9]}]
  policy: {kind: stochastic, probs: [0.2, 0.3, 0.5]}
)") == "rl.policy");
  CHECK(error_path(R"(
length: 10
rl:
  environments: [{kind: action-reward, reward_prob: [0.1, 0.9]}]
  value_steps: [20]
)")
            .rfind("rl.value_steps", 0) == 0);
}

TEST_CASE("built-in scenarios") {
  const std::vector<std::string> required = {"det-elimination", "det-majority",       "bernoulli-pair",
                                             "markov-class",    "trouble-osc",        "branching-nonergodic",
                                             "rl-two-env",      "discriminative-regression"};
  for (const auto& name : required) {
    REQUIRE(find_scenario(name) != nullptr);
    const auto cfg = scenario_config(name);
    CHECK(cfg.name == name);
  }
  for (const auto& s : builtin_scenarios()) CHECK_NOTHROW(scenario_config(s.name));
  CHECK(find_scenario("nope") == nullptr);
  CHECK_THROWS_AS(scenario_config("nope"), ConfigError);
}

TEST_CASE("exported scenario files match the registry") {
  const std::filesystem::path dir = std::filesystem::path(MDLP_SOURCE_DIR) / "configs";
  for (const auto& s : builtin_scenarios()) {
    const auto path = dir / (s.name + ".yaml");
    REQUIRE_MESSAGE(std::filesystem::exists(path), path.string());
    CHECK(config_hash(load_config(path)) == config_hash(scenario_config(s.name)));
  }
}

}  // TEST_SUITE
