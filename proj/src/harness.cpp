#include "mdlp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mdlp/errors.hpp"
#include "mdlp/predictors.hpp"
#include "mdlp/rl.hpp"

namespace mdlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 16;  // trajectories buffered per parallel batch

Symbol argmax(std::span<const double> probs) {
  return static_cast<Symbol>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

bool fits_budget(std::size_t alphabet, std::size_t h, std::size_t budget) {
  std::size_t n = 1;
  for (std::size_t k = 0; k < h; ++k) {
    if (n > budget / alphabet) return false;
    n *= alphabet;
  }
  return n <= budget;
}

struct Engine {
  const ExperimentConfig& cfg;
  ModelClass cls;
  std::vector<MeasurePtr> models;
  std::vector<double> codelengths;
  std::vector<double> log_prior;
  MeasurePtr truth;
  std::vector<bool> exact;  // per predictor
  bool need_posterior = false;

  explicit Engine(const ExperimentConfig& c) : cfg(c), cls(build_model_class(c).with_truth(c.truth)) {
    models = cls.enumerate();
    codelengths = cls.codelengths();
    log_prior = prior_log_weights(cls);
    truth = cls.model_ptr(cfg.truth);
    for (std::size_t i = 0; i < cfg.predictors.size(); ++i) {
      const auto& p = cfg.predictors[i];
      exact.push_back(fits_budget(cls.alphabet_size(), p.h, cfg.estimator.budget));
      if (p.kind == PredictorKind::elimination || p.kind == PredictorKind::majority) {
        if (!cls.is_deterministic()) {
          throw ConfigError("predictors[" + std::to_string(i) + "]",
                            to_string(p.kind) + " needs a class of deterministic measures");
        }
      }
      if (p.kind == PredictorKind::bayes || p.kind == PredictorKind::bayes_sampled || p.kind == PredictorKind::map) {
        need_posterior = true;
      }
    }
  }
};

struct DistanceResult {
  double value = kNaN;
  double stderr_ = kNaN;
  Estimator estimator = Estimator::none;
};

// d_h(P, other | x). `truth_blocks` caches P's block distribution per h.
DistanceResult distance(const Engine& e, std::size_t pred, const Measure& other, Sequence& x,
                        std::map<std::size_t, std::vector<double>>& truth_blocks, RandomStream& mc) {
  const std::size_t h = e.cfg.predictors[pred].h;
  if (&other == e.truth.get()) return {0.0, 0.0, e.exact[pred] ? Estimator::exact : Estimator::monte_carlo};
  if (e.exact[pred]) {
    std::size_t blocks = 1;
    for (std::size_t k = 0; k < h; ++k) blocks *= e.cls.alphabet_size();
    auto it = truth_blocks.find(h);
    if (it == truth_blocks.end()) {
      it = truth_blocks.emplace(h, std::vector<double>(blocks)).first;
      block_distribution_into(*e.truth, x, h, it->second);
    }
    std::vector<double> q(blocks);
    block_distribution_into(other, x, h, q);
    return {std::min(2.0, l1_distance(it->second, q)), 0.0, Estimator::exact};
  }
  const auto est = dh_monte_carlo_unchecked(*e.truth, other, x, h, e.cfg.estimator.mc_samples, mc.next_u64(),
                                            kernels::Exec::serial);
  return {est.estimate, est.stderr_, Estimator::monte_carlo};
}

struct PredictorState {
  AliveSet alive;
  WeightedAliveSet weighted;
  std::size_t errors = 0;
  double code_bits = 0.0;  // -log2 MDLI(x)
};

std::vector<RunRow> run_sequence_trajectory(const Engine& e, std::size_t r) {
  const auto& cfg = e.cfg;
  const std::size_t L = cfg.length;
  const std::size_t n = e.models.size();
  const std::size_t alphabet = e.cls.alphabet_size();
  const std::size_t truth_i = cfg.truth - 1;

  const RandomStream traj(derive_seed(cfg.seed, r));
  RandomStream data = traj.child(0);
  RandomStream sampler = traj.child(1);
  RandomStream mc = traj.child(2);
  const Sequence omega = sample_continuation(*e.truth, {}, L, data);

  std::vector<PredictorState> states(cfg.predictors.size());
  for (std::size_t p = 0; p < cfg.predictors.size(); ++p) {
    if (cfg.predictors[p].kind == PredictorKind::elimination) states[p].alive = make_alive_set(e.cls, cfg.predictors[p].h);
    if (cfg.predictors[p].kind == PredictorKind::majority) states[p].weighted = make_weighted_alive_set(e.cls);
  }

  std::vector<RunRow> rows;
  rows.reserve((L + 1) * cfg.predictors.size());
  Sequence x;
  x.reserve(L + 64);
  std::vector<double> lm(n, 0.0), scores(n), probs(alphabet);
  std::map<std::size_t, std::vector<double>> truth_blocks;

  for (std::size_t l = 0; l <= L; ++l) {
    truth_blocks.clear();
    const bool dh_step = l % cfg.estimator.stride == 0 || l == L;
    for (std::size_t i = 0; i < n; ++i) scores[i] = e.codelengths[i] - lm[i];
    const std::size_t mdl_sel = argmin_lowest_index(scores);

    std::optional<Posterior> post;
    std::size_t map_sel = 0;
    std::shared_ptr<ConditionedMixture> mixture;
    if (e.need_posterior) {
      post = posterior_from_log_marginals(e.log_prior, lm);
      std::vector<double> neg_log_post(n);
      for (std::size_t i = 0; i < n; ++i) neg_log_post[i] = post->log_mixture.bits() - (e.log_prior[i] + lm[i]);
      map_sel = argmin_lowest_index(neg_log_post);
      mixture = std::make_shared<ConditionedMixture>(e.models, post->weights, l);
    }
    const double lp = lm[truth_i];

    for (std::size_t p = 0; p < cfg.predictors.size(); ++p) {
      const auto& pc = cfg.predictors[p];
      auto& st = states[p];
      RunRow row;
      row.trajectory = r;
      row.step = l;
      row.predictor = p;
      row.seed = traj.seed();

      const Measure* measure = nullptr;  // for d_h
      const Measure* one_step = nullptr;  // for the point prediction
      std::shared_ptr<Measure> owned;
      double log_q = kNaN;  // log2 of the predictor's probability of x
      std::optional<Symbol> guess;

      switch (pc.kind) {
        case PredictorKind::mdl:
          row.selected = mdl_sel;
          row.score_bits = scores[mdl_sel - 1];
          measure = one_step = e.models[mdl_sel - 1].get();
          log_q = lm[mdl_sel - 1];
          row.errors = st.errors;
          break;
        case PredictorKind::map:
          row.selected = map_sel;
          row.score_bits = post->log_mixture.bits() - (e.log_prior[map_sel - 1] + lm[map_sel - 1]);
          measure = one_step = e.models[map_sel - 1].get();
          log_q = lm[map_sel - 1];
          row.errors = st.errors;
          break;
        case PredictorKind::bayes:
        case PredictorKind::bayes_sampled:
          row.score_bits = -post->log_mixture.bits();
          measure = one_step = mixture.get();
          log_q = post->log_mixture.bits();
          row.errors = st.errors;
          break;
        case PredictorKind::mdli:
          row.selected = mdl_sel;
          row.score_bits = st.code_bits;
          one_step = e.models[mdl_sel - 1].get();
          if (pc.h == 1) {
            measure = one_step;
          } else {
            owned = std::make_shared<ConditionedMdli>(e.models, scores, l);
            measure = owned.get();
          }
          log_q = -st.code_bits;
          row.errors = st.errors;
          break;
        case PredictorKind::elimination: {
          const std::size_t s = st.alive.simplest();
          row.selected = s;
          row.score_bits = e.codelengths[s - 1];
          measure = e.models[s - 1].get();
          log_q = lm[s - 1];
          row.errors = st.alive.errors;
          break;
        }
        case PredictorKind::majority:
          row.score_bits = -std::log2(st.weighted.alive_weight);
          row.errors = st.weighted.errors;
          break;
        case PredictorKind::discriminative:
          break;
      }

      if (cfg.log_ratio_model) log_q = lm[*cfg.log_ratio_model - 1];
      if (!std::isnan(log_q)) row.log_ratio_bits = log_q == -kInf ? -kInf : log_q - lp;

      if (measure && dh_step) {
        const auto d = distance(e, p, *measure, x, truth_blocks, mc);
        row.d_h = d.value;
        row.d_h_stderr = d.stderr_;
        row.estimator = d.estimator;
      }
      rows.push_back(row);

      if (l == L) continue;
      const Symbol next = omega[l];
      switch (pc.kind) {
        case PredictorKind::elimination:
          st.alive = eliminate_step(std::move(st.alive), e.cls, l + 1, next);
          break;
        case PredictorKind::majority:
          st.weighted = majority_step(std::move(st.weighted), e.cls, l + 1, next);
          break;
        case PredictorKind::bayes_sampled:
          one_step->predict(x, probs);
          guess = static_cast<Symbol>(sampler.categorical(probs));
          break;
        default:
          one_step->predict(x, probs);
          guess = argmax(probs);
          if (pc.kind == PredictorKind::mdli) st.code_bits += probs[next] > 0.0 ? -std::log2(probs[next]) : kInf;
          break;
      }
      if (guess && *guess != next) ++st.errors;
    }

    if (l == L) break;
    kernels::accumulate_log_predictive(e.models, x, omega[l], lm, kernels::Exec::serial);
    x.push_back(omega[l]);
  }
  return rows;
}

struct RlEngine {
  const ExperimentConfig& cfg;
  const RlConfig& rl;
  rl::EnvironmentClass envs;
  rl::PolicyPtr policy;
  std::size_t horizon;

  explicit RlEngine(const ExperimentConfig& c)
      : cfg(c), rl(*c.rl), envs(build_environment_class(*c.rl)), policy(build_policy(*c.rl)),
        horizon(c.rl->effective_horizon()) {}
};

std::vector<RunRow> run_rl_trajectory(const RlEngine& e, std::size_t r) {
  const auto& cfg = e.cfg;
  const std::size_t L = cfg.length;
  const std::size_t n = e.envs.size();
  const rl::Environment& truth = e.envs.env(cfg.truth);

  const RandomStream traj(derive_seed(cfg.seed, r));
  RandomStream data = traj.child(0);
  RandomStream mc = traj.child(2);
  const rl::InteractionHistory hist = rl::interact(truth, *e.policy, L, data);

  std::vector<RunRow> rows;
  rows.reserve((L + 1) * cfg.predictors.size());
  std::vector<double> ll(n, 0.0), scores(n), dist(truth.num_percepts());
  auto next_value = e.rl.value_steps.begin();

  for (std::size_t l = 0; l <= L; ++l) {
    for (std::size_t i = 0; i < n; ++i) scores[i] = e.envs.codelengths[i] - ll[i];
    const std::size_t sel = argmin_lowest_index(scores);

    std::optional<rl::ValueGap> gap;
    if (next_value != e.rl.value_steps.end() && *next_value == l) {
      ++next_value;
      rl::InteractionHistory prefix;
      prefix.actions.assign(hist.actions.begin(), hist.actions.begin() + static_cast<std::ptrdiff_t>(l));
      prefix.percepts.assign(hist.percepts.begin(), hist.percepts.begin() + static_cast<std::ptrdiff_t>(l));
      prefix.rewards.assign(hist.rewards.begin(), hist.rewards.begin() + static_cast<std::ptrdiff_t>(l));
      gap = rl::value_gap(e.envs, truth, *e.policy, prefix, e.rl.gamma, e.horizon, e.rl.rollouts, mc);
    }

    for (std::size_t p = 0; p < cfg.predictors.size(); ++p) {
      RunRow row;
      row.trajectory = r;
      row.step = l;
      row.predictor = p;
      row.seed = traj.seed();
      row.selected = sel;
      row.score_bits = scores[sel - 1];
      const std::size_t q = cfg.log_ratio_model.value_or(sel);
      row.log_ratio_bits = ll[q - 1] == -kInf ? -kInf : ll[q - 1] - ll[cfg.truth - 1];
      if (gap) {
        row.value_sel = gap->value_selected;
        row.value_true = gap->value_true;
        row.value_gap = gap->gap;
      }
      rows.push_back(row);
    }

    if (l == L) break;
    const auto percepts = std::span<const std::size_t>(hist.percepts).first(l);
    const auto actions = std::span<const std::size_t>(hist.actions).first(l + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (ll[i] == -kInf) continue;
      e.envs.environments[i]->percept_distribution(percepts, actions, dist);
      const double pr = dist[hist.percepts[l]];
      ll[i] = pr > 0.0 ? ll[i] + std::log2(pr) : -kInf;
    }
  }
  return rows;
}

template <class F>
void run_chunks(std::size_t trajectories, const F& one, const RowSink& sink, kernels::Exec exec) {
  for (std::size_t begin = 0; begin < trajectories; begin += kChunk) {
    const std::size_t end = std::min(trajectories, begin + kChunk);
    std::vector<std::vector<RunRow>> out(end - begin);
    kernels::for_each_index(
        end - begin, [&](std::size_t k) { out[k] = one(begin + k); }, exec);
    for (const auto& rows : out) {
      for (const auto& row : rows) sink(row);
    }
  }
}

// Deterministic bootstrap standard error of the median.
MedianEstimate median_with_bootstrap(std::vector<double> v, std::uint64_t seed) {
  MedianEstimate m;
  m.count = v.size();
  if (v.empty()) return m;
  auto median_of = [](std::vector<double>& a) {
    const std::size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid), a.end());
    double hi = a[mid];
    if (a.size() % 2 == 1) return hi;
    const double lo = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
  };
  std::vector<double> work = v;
  m.median = median_of(work);
  constexpr std::size_t kResamples = 200;
  RandomStream rng(seed);
  kernels::MomentSums sums;
  std::vector<double> resample(v.size());
  for (std::size_t b = 0; b < kResamples; ++b) {
    for (auto& value : resample) value = v[rng.next_u64() % v.size()];
    const double med = median_of(resample);
    ++sums.count;
    sums.sum += med;
    sums.sum_sq += med * med;
  }
  const double n = static_cast<double>(sums.count);
  m.stderr_ = std::sqrt(std::max(0.0, (sums.sum_sq - sums.sum * sums.sum / n) / (n - 1.0)));
  return m;
}

MeanEstimate mean_of(std::span<const double> v) {
  MeanEstimate m;
  kernels::MomentSums sums;
  kernels::CompensatedSum s, s2;
  m.max = -kInf;
  for (double x : v) {
    s.add(x);
    s2.add(x * x);
    m.max = std::max(m.max, x);
  }
  sums.count = v.size();
  sums.sum = s.value();
  sums.sum_sq = s2.value();
  m.count = v.size();
  if (v.empty()) {
    m.max = kNaN;
    return m;
  }
  m.mean = sums.mean();
  m.stderr_ = sums.stderr_of_mean();
  return m;
}

}  // namespace

RunHeader run_header(const ExperimentConfig& cfg) {
  RunHeader h;
  h.run_id = run_id(cfg);
  for (const auto& p : cfg.predictors) h.predictors.push_back(p.name);
  return h;
}

void run_experiment(const ExperimentConfig& cfg, const RowSink& sink, kernels::Exec exec) {
  if (cfg.is_rl()) {
    const RlEngine e(cfg);
    run_chunks(cfg.trajectories, [&](std::size_t r) { return run_rl_trajectory(e, r); }, sink, exec);
  } else {
    const Engine e(cfg);
    run_chunks(cfg.trajectories, [&](std::size_t r) { return run_sequence_trajectory(e, r); }, sink, exec);
  }
}

std::vector<RunRow> run_experiment(const ExperimentConfig& cfg, kernels::Exec exec) {
  std::vector<RunRow> rows;
  run_experiment(cfg, [&](const RunRow& r) { rows.push_back(r); }, exec);
  return rows;
}

// ---- RecordStats ------------------------------------------------------------

RecordStats::Series& RecordStats::series(std::size_t p, std::size_t trajectory) {
  if (data_.size() <= p) data_.resize(p + 1);
  if (data_[p].size() <= trajectory) data_[p].resize(trajectory + 1);
  return data_[p][trajectory];
}

void RecordStats::add(const RunRow& row) {
  Series& s = series(row.predictor, row.trajectory);
  if (s.dh.size() <= row.step) {
    s.dh.resize(row.step + 1, kNaN);
    s.selected.resize(row.step + 1, -1);
    s.errors.resize(row.step + 1, kNaN);
  }
  s.dh[row.step] = row.d_h;
  s.selected[row.step] = row.selected ? static_cast<std::int64_t>(*row.selected) : -1;
  s.errors[row.step] = row.errors ? static_cast<double>(*row.errors) : kNaN;
  if (!std::isnan(row.value_gap)) s.values[row.step] = {row.value_gap, row.value_sel, row.value_true};
  ++s.steps;
  last_step_ = std::max(last_step_, row.step);
  ++rows_;
}

bool RecordStats::has_column(const std::string& column) const {
  return columns_.empty() || std::find(columns_.begin(), columns_.end(), column) != columns_.end();
}

std::optional<std::size_t> RecordStats::predictor_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t RecordStats::trajectories(std::size_t p) const { return p < data_.size() ? data_[p].size() : 0; }

MedianEstimate RecordStats::median_dh(std::size_t p, std::size_t step) const {
  std::vector<double> v;
  if (p < data_.size()) {
    for (const auto& s : data_[p]) {
      if (step < s.dh.size() && !std::isnan(s.dh[step])) v.push_back(s.dh[step]);
    }
  }
  return median_with_bootstrap(std::move(v), derive_seed(0x6d6564, step));
}

MedianEstimate RecordStats::median_dh_window(std::size_t p, std::size_t from) const {
  std::vector<double> v;
  if (p < data_.size()) {
    for (const auto& s : data_[p]) {
      for (std::size_t l = from; l < s.dh.size(); ++l) {
        if (!std::isnan(s.dh[l])) v.push_back(s.dh[l]);
      }
    }
  }
  return median_with_bootstrap(std::move(v), derive_seed(0x77696e, from));
}

std::optional<MeanEstimate> RecordStats::cumulative_dh(std::size_t p, int power) const {
  if (p >= data_.size() || data_[p].empty()) return std::nullopt;
  std::vector<double> totals;
  for (const auto& s : data_[p]) {
    kernels::CompensatedSum total;
    for (double d : s.dh) {
      if (std::isnan(d)) return std::nullopt;
      total.add(power == 1 ? d : std::pow(d, power));
    }
    totals.push_back(total.value());
  }
  return mean_of(totals);
}

MeanEstimate RecordStats::selection_flips(std::size_t p) const {
  std::vector<double> flips;
  if (p < data_.size()) {
    for (const auto& s : data_[p]) {
      std::size_t count = 0;
      for (std::size_t l = 1; l < s.selected.size(); ++l) {
        if (s.selected[l] >= 0 && s.selected[l - 1] >= 0 && s.selected[l] != s.selected[l - 1]) ++count;
      }
      flips.push_back(static_cast<double>(count));
    }
  }
  return mean_of(flips);
}

MedianEstimate RecordStats::median_flips(std::size_t p) const {
  std::vector<double> flips;
  if (p < data_.size()) {
    for (const auto& s : data_[p]) {
      std::size_t count = 0;
      for (std::size_t l = 1; l < s.selected.size(); ++l) {
        if (s.selected[l] >= 0 && s.selected[l - 1] >= 0 && s.selected[l] != s.selected[l - 1]) ++count;
      }
      flips.push_back(static_cast<double>(count));
    }
  }
  return median_with_bootstrap(std::move(flips), 0x666c6970);
}

std::optional<MeanEstimate> RecordStats::final_errors(std::size_t p) const {
  if (p >= data_.size() || data_[p].empty()) return std::nullopt;
  std::vector<double> errors;
  for (const auto& s : data_[p]) {
    if (s.errors.empty() || std::isnan(s.errors.back())) return std::nullopt;
    errors.push_back(s.errors.back());
  }
  return mean_of(errors);
}

std::vector<std::size_t> RecordStats::value_steps(std::size_t p) const {
  std::vector<std::size_t> steps;
  if (p < data_.size()) {
    for (const auto& s : data_[p]) {
      for (const auto& [step, _] : s.values) steps.push_back(step);
    }
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

std::vector<std::array<double, 3>> RecordStats::values_at(std::size_t p, std::size_t step) const {
  std::vector<std::array<double, 3>> out;
  if (p < data_.size()) {
    for (const auto& s : data_[p]) {
      const auto it = s.values.find(step);
      if (it != s.values.end()) out.push_back(it->second);
    }
  }
  return out;
}

// ---- bounds -----------------------------------------------------------------

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::skipped:
      return "skipped";
  }
  return "skipped";
}

bool BoundReport::all_pass() const {
  return std::none_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.verdict == Verdict::fail; });
}

namespace {

void require_column(const RecordStats& stats, const std::string& column) {
  if (!stats.has_column(column)) throw MissingColumn("records lack the '" + column + "' column");
}

BoundCheck noisy_upper(const std::string& predictor, const std::string& bound, const std::string& description,
                       const MeanEstimate& m, double limit) {
  BoundCheck c{predictor, bound, description, m.mean, m.stderr_, limit, limit - m.mean, false, Verdict::fail, ""};
  c.verdict = m.mean <= limit + 4.0 * m.stderr_ ? Verdict::pass : Verdict::fail;
  return c;
}

BoundCheck exact_upper(const std::string& predictor, const std::string& bound, const std::string& description,
                       const MeanEstimate& m, double limit) {
  BoundCheck c{predictor, bound, description, m.max, 0.0, limit, limit - m.max, true, Verdict::fail, ""};
  c.verdict = m.max <= limit + 1e-9 ? Verdict::pass : Verdict::fail;
  return c;
}

BoundCheck skipped(const std::string& predictor, const std::string& bound, const std::string& note) {
  BoundCheck c;
  c.predictor = predictor;
  c.bound = bound;
  c.note = note;
  return c;
}

}  // namespace

BoundReport check_bounds(const RecordStats& stats, const ExperimentConfig& cfg) {
  require_column(stats, "trajectory");
  require_column(stats, "step");
  require_column(stats, "predictor");
  BoundReport report;

  double k_truth = 0.0, ln_inv_w = 0.0, log2_inv_w = 0.0;
  bool deterministic = false;
  if (!cfg.is_rl()) {
    const ModelClass cls = build_model_class(cfg);
    deterministic = cls.is_deterministic();
    const auto lp = prior_log_weights(cls);
    k_truth = cls.codelength(cfg.truth);
    log2_inv_w = -lp[cfg.truth - 1];
    ln_inv_w = log2_inv_w * std::numbers::ln2;
  }

  for (const auto& pc : cfg.predictors) {
    const auto idx = stats.predictor_index(pc.name);
    if (!idx || stats.trajectories(*idx) == 0) throw MissingColumn("records contain no rows for predictor '" + pc.name + "'");
    const std::size_t p = *idx;
    const double h = static_cast<double>(pc.h);
    const std::string hs = std::to_string(pc.h);

    auto cumulative = [&](const std::string& bound, const std::string& description, double limit, int power) {
      require_column(stats, "d_h");
      const auto m = stats.cumulative_dh(p, power);
      if (!m) {
        report.checks.push_back(skipped(pc.name, bound, "d_h is not recorded at every step (estimator.stride > 1)"));
        return;
      }
      report.checks.push_back(noisy_upper(pc.name, bound, description, *m, limit));
    };

    switch (pc.kind) {
      case PredictorKind::mdl:
      case PredictorKind::map:
        cumulative("mdl-cumulative", "mean sum_l d_" + hs + " <= 21 h 2^K(P)", 21.0 * h * std::exp2(k_truth), 1);
        break;
      case PredictorKind::bayes:
        cumulative("bayes-cumulative", "mean sum_l d_" + hs + " <= h ln(1/w_P)", h * ln_inv_w, 1);
        cumulative("bayes-squared", "mean sum_l d_" + hs + "^2 <= 2 h ln(1/w_P)", 2.0 * h * ln_inv_w, 2);
        break;
      case PredictorKind::bayes_sampled: {
        if (!deterministic) {
          report.checks.push_back(skipped(pc.name, "sampled-errors", "the error bound needs a deterministic class"));
          break;
        }
        require_column(stats, "errors_cum");
        const auto m = stats.final_errors(p);
        if (!m) throw MissingColumn("errors_cum is empty for predictor '" + pc.name + "'");
        report.checks.push_back(noisy_upper(pc.name, "sampled-errors", "mean errors <= ln(1/w_P)", *m, ln_inv_w));
        break;
      }
      case PredictorKind::elimination: {
        require_column(stats, "errors_cum");
        const auto m = stats.final_errors(p);
        if (!m) throw MissingColumn("errors_cum is empty for predictor '" + pc.name + "'");
        report.checks.push_back(exact_upper(pc.name, "elimination-errors", "errors <= h (m - 1) on every trajectory", *m,
                                            h * static_cast<double>(cfg.truth - 1)));
        break;
      }
      case PredictorKind::majority: {
        require_column(stats, "errors_cum");
        const auto m = stats.final_errors(p);
        if (!m) throw MissingColumn("errors_cum is empty for predictor '" + pc.name + "'");
        report.checks.push_back(
            exact_upper(pc.name, "majority-errors", "errors <= log2(1/w_P) on every trajectory", *m, log2_inv_w));
        break;
      }
      case PredictorKind::discriminative: {
        require_column(stats, "value_gap");
        const auto steps = stats.value_steps(p);
        if (steps.empty()) {
          report.checks.push_back(skipped(pc.name, "value-gap", "no value estimates recorded"));
          break;
        }
        const auto values = stats.values_at(p, steps.back());
        std::size_t within = 0;
        for (const auto& v : values) within += v[0] <= cfg.rl->gap_tolerance ? 1 : 0;
        const double fraction = static_cast<double>(within) / static_cast<double>(values.size());
        BoundCheck c;
        c.predictor = pc.name;
        c.bound = "value-gap";
        c.description = "fraction of trajectories with |V_sel - V_P| <= " + std::to_string(cfg.rl->gap_tolerance) +
                        " at step " + std::to_string(steps.back());
        c.observed = fraction;
        c.limit = cfg.rl->gap_quantile;
        c.margin = fraction - cfg.rl->gap_quantile;
        c.exact = true;
        c.verdict = fraction >= cfg.rl->gap_quantile ? Verdict::pass : Verdict::fail;
        report.checks.push_back(c);
        break;
      }
      case PredictorKind::mdli:
        break;
    }

    // Configured expectations apply to predictors that record the relevant column.
    const bool has_dh = stats.median_dh(p, stats.last_step()).count > 0;
    if (cfg.expect.dh_median_below && has_dh) {
      const std::size_t L = stats.last_step();
      const auto m = cfg.expect.final_window ? stats.median_dh_window(p, L - L / 10) : stats.median_dh(p, L);
      BoundCheck c;
      c.predictor = pc.name;
      c.bound = cfg.expect.final_window ? "final-window-median" : "final-median";
      c.description = cfg.expect.final_window ? "median d_" + hs + " over the last 10% of steps < eps"
                                              : "median d_" + hs + " across trajectories at the last step < eps";
      c.observed = m.median;
      c.stderr_ = m.stderr_;
      c.limit = *cfg.expect.dh_median_below;
      c.margin = c.limit - m.median;
      c.verdict = m.median < c.limit ? Verdict::pass : Verdict::fail;
      report.checks.push_back(c);
    }
    if (cfg.expect.monotone_checkpoints && has_dh) {
      BoundCheck c;
      c.predictor = pc.name;
      c.bound = "monotone-median";
      c.description = "median d_" + hs + " non-increasing over checkpoints up to 4 stderr";
      c.verdict = Verdict::pass;
      double worst = -kInf;
      for (std::size_t k = 1; k < cfg.checkpoints.size(); ++k) {
        const auto a = stats.median_dh(p, cfg.checkpoints[k - 1]);
        const auto b = stats.median_dh(p, cfg.checkpoints[k]);
        const double rise = b.median - a.median;
        const double se = std::hypot(a.stderr_, b.stderr_);
        worst = std::max(worst, rise);
        if (rise > 4.0 * se) {
          c.verdict = Verdict::fail;
          c.note = "median rises from step " + std::to_string(cfg.checkpoints[k - 1]) + " to " +
                   std::to_string(cfg.checkpoints[k]);
        }
      }
      c.observed = worst;
      c.limit = 0.0;
      c.margin = -worst;
      report.checks.push_back(c);
    }
    if (cfg.expect.min_mean_flips && (pc.kind == PredictorKind::mdl || pc.kind == PredictorKind::map ||
                                      pc.kind == PredictorKind::mdli || pc.kind == PredictorKind::discriminative)) {
      require_column(stats, "selected_index");
      const auto m = stats.selection_flips(p);
      BoundCheck c{pc.name, "selection-flips", "mean selection changes per trajectory >= minimum",
                   m.mean, m.stderr_, *cfg.expect.min_mean_flips, m.mean - *cfg.expect.min_mean_flips,
                   false, Verdict::fail, ""};
      c.verdict = m.mean >= c.limit ? Verdict::pass : Verdict::fail;
      report.checks.push_back(c);
    }
  }
  return report;
}

BoundReport check_bounds(std::span<const RunRow> rows, const ExperimentConfig& cfg) {
  RecordStats stats(run_header(cfg).predictors);
  for (const auto& r : rows) stats.add(r);
  return check_bounds(stats, cfg);
}

}  // namespace mdlp
