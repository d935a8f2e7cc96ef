#include "mdlp/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mdlp/errors.hpp"

namespace mdlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Symbol argmax_symbol(std::span<const double> probs) {
  return static_cast<Symbol>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

void require_deterministic(const ModelClass& c) {
  const auto& models = c.enumerate();
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!models[i]->is_deterministic()) {
      throw NotDeterministic("model " + std::to_string(i + 1) + " (" + models[i]->describe() + ") is not deterministic");
    }
  }
}

}  // namespace

std::size_t argmin_lowest_index(std::span<const double> scores) {
  double best = kInf;
  for (double s : scores) best = std::min(best, s);
  if (best == kInf) throw AllExcluded("every enumerated model assigns probability zero to the data");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] <= best + kTieToleranceBits) return i + 1;
  }
  return 0;  // unreachable
}

std::vector<double> log_marginals(const ModelClass& c, SequenceView x) {
  const auto& models = c.enumerate();
  if (!models.empty()) validate_prefix(*models.front(), x);
  std::vector<double> lm(models.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) kernels::accumulate_log_predictive(models, x.first(t), x[t], lm);
  return lm;
}

std::vector<double> prior_log_weights(const ModelClass& c) {
  const auto& k = c.codelengths();
  const double log_z = std::log2(kraft_mass(c, c.size()));
  std::vector<double> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = -k[i] - log_z;
  return out;
}

Posterior posterior_from_log_marginals(std::span<const double> log_prior, std::span<const double> lm) {
  const std::size_t n = lm.size();
  std::vector<double> a(n);
  double top = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = log_prior[i] + lm[i];
    top = std::max(top, a[i]);
  }
  if (top == -kInf) throw AllExcluded("Bayes mixture assigns probability zero to the data");
  kernels::CompensatedSum s;
  for (double v : a) s.add(std::exp2(v - top));
  const double log_b = top + std::log2(s.value());
  Posterior out{std::vector<double>(n), LogProb(log_b)};
  for (std::size_t i = 0; i < n; ++i) out.weights[i] = std::exp2(a[i] - log_b);
  return out;
}

Selection mdl_select(const ModelClass& c, SequenceView x) {
  const auto lm = log_marginals(c, x);
  Selection sel;
  sel.scores.resize(lm.size());
  for (std::size_t i = 0; i < lm.size(); ++i) sel.scores[i] = c.codelengths()[i] - lm[i];
  sel.index = argmin_lowest_index(sel.scores);
  return sel;
}

double mdl_predict(const ModelClass& c, SequenceView x, SequenceView z) {
  const auto sel = mdl_select(c, x);
  return log_conditional(c.model(sel.index), x, z).probability();
}

std::size_t map_select(const ModelClass& c, SequenceView x) {
  const auto lm = log_marginals(c, x);
  const auto lp = prior_log_weights(c);
  const auto post = posterior_from_log_marginals(lp, lm);
  // Work with log2 posteriors so tiny posteriors stay distinguishable.
  std::vector<double> neg_log_post(lm.size());
  for (std::size_t i = 0; i < lm.size(); ++i) neg_log_post[i] = post.log_mixture.bits() - (lp[i] + lm[i]);
  return argmin_lowest_index(neg_log_post);
}

std::vector<double> bayes_posterior(const ModelClass& c, SequenceView x) {
  return posterior_from_log_marginals(prior_log_weights(c), log_marginals(c, x)).weights;
}

LogProb log_bayes(const ModelClass& c, SequenceView x) {
  const auto lm = log_marginals(c, x);
  const auto lp = prior_log_weights(c);
  double top = -kInf;
  for (std::size_t i = 0; i < lm.size(); ++i) top = std::max(top, lp[i] + lm[i]);
  if (top == -kInf) return LogProb::zero();
  return posterior_from_log_marginals(lp, lm).log_mixture;
}

double bayes_predict(const ModelClass& c, SequenceView x, SequenceView z) {
  const auto post = bayes_posterior(c, x);
  kernels::CompensatedSum total;
  for (std::size_t i = 0; i < post.size(); ++i) {
    if (post[i] > 0.0) total.add(post[i] * log_conditional(c.model(i + 1), x, z).probability());
  }
  return total.value();
}

ConditionedMixture::ConditionedMixture(std::vector<MeasurePtr> models, std::vector<double> weights,
                                       std::size_t anchor_length)
    : models_(std::move(models)), anchor_(anchor_length), alphabet_(models_.front()->alphabet_size()) {
  log_weights_.reserve(weights.size());
  for (double w : weights) log_weights_.push_back(w > 0.0 ? std::log2(w) : -kInf);
}

void ConditionedMixture::predict(SequenceView x, std::span<double> out) const {
  const std::size_t n = models_.size();
  std::vector<double> a(log_weights_);
  std::vector<double> buf(alphabet_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = anchor_; t < x.size() && a[i] > -kInf; ++t) {
      models_[i]->predict(x.first(t), buf);
      a[i] = buf[x[t]] > 0.0 ? a[i] + std::log2(buf[x[t]]) : -kInf;
    }
  }
  const double top = *std::max_element(a.begin(), a.end());
  if (top == -kInf) throw UndefinedConditional("mixture assigns probability zero to the conditioning prefix");
  std::fill(out.begin(), out.end(), 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == -kInf) continue;
    const double v = std::exp2(a[i] - top);
    norm += v;
    models_[i]->predict(x, buf);
    for (std::size_t s = 0; s < alphabet_; ++s) out[s] += v * buf[s];
  }
  for (auto& p : out) p /= norm;
}

ConditionedMdli::ConditionedMdli(std::vector<MeasurePtr> models, std::vector<double> scores, std::size_t anchor_length)
    : models_(std::move(models)),
      scores_(std::move(scores)),
      anchor_(anchor_length),
      alphabet_(models_.front()->alphabet_size()) {}

void ConditionedMdli::predict(SequenceView x, std::span<double> out) const {
  std::vector<double> s(scores_);
  std::vector<double> buf(alphabet_);
  for (std::size_t i = 0; i < models_.size(); ++i) {
    for (std::size_t t = anchor_; t < x.size() && s[i] < kInf; ++t) {
      models_[i]->predict(x.first(t), buf);
      s[i] = buf[x[t]] > 0.0 ? s[i] - std::log2(buf[x[t]]) : kInf;
    }
  }
  models_[argmin_lowest_index(s) - 1]->predict(x, out);
}

MdliState mdli_step(MdliState s, const ModelClass& c, SequenceView past, Symbol next) {
  const auto sel = mdl_select(c, past);
  std::vector<double> probs(c.alphabet_size());
  if (next >= probs.size()) throw std::invalid_argument("symbol outside alphabet");
  c.model(sel.index).predict(past, probs);
  s.log2_mdli = probs[next] > 0.0 ? s.log2_mdli + std::log2(probs[next]) : -kInf;
  s.selections.push_back(sel.index);
  return s;
}

Sequence deterministic_block(const Measure& m, SequenceView x, std::size_t h) {
  Sequence buffer(x.begin(), x.end());
  std::vector<double> probs(m.alphabet_size());
  Sequence block;
  block.reserve(h);
  for (std::size_t k = 0; k < h; ++k) {
    m.predict(buffer, probs);
    const Symbol s = argmax_symbol(probs);
    block.push_back(s);
    buffer.push_back(s);
  }
  return block;
}

AliveSet make_alive_set(const ModelClass& c, std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("lookahead horizon must be at least 1");
  require_deterministic(c);
  AliveSet a;
  a.horizon = horizon;
  a.alive.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) a.alive[i] = i + 1;
  return a;
}

Sequence predict_block(const AliveSet& a, const ModelClass& c) {
  if (a.alive.empty()) throw AllExcluded("no model is consistent with the observations");
  return deterministic_block(c.model(a.simplest()), a.history, a.horizon);
}

AliveSet eliminate_step(AliveSet a, const ModelClass& c, std::size_t t, Symbol observed) {
  if (t != a.history.size() + 1) throw std::invalid_argument("eliminate_step: steps must be consecutive");
  if (observed >= c.alphabet_size()) throw std::invalid_argument("symbol outside alphabet");

  a.pending.push_back({t, predict_block(a, c), false});
  for (auto& block : a.pending) {
    if (!block.wrong && block.symbols[t - block.start] != observed) {
      block.wrong = true;
      ++a.errors;
    }
  }
  while (!a.pending.empty() && a.pending.front().start + a.horizon - 1 <= t) a.pending.pop_front();

  std::vector<double> probs(c.alphabet_size());
  std::erase_if(a.alive, [&](std::size_t i) {
    c.model(i).predict(a.history, probs);
    return probs[observed] <= 0.0;
  });
  a.history.push_back(observed);
  return a;
}

WeightedAliveSet make_weighted_alive_set(const ModelClass& c) {
  require_deterministic(c);
  WeightedAliveSet w;
  const auto lp = prior_log_weights(c);
  kernels::CompensatedSum total;
  for (std::size_t i = 0; i < c.size(); ++i) {
    w.alive.push_back(i + 1);
    w.weights.push_back(std::exp2(lp[i]));
    total.add(w.weights.back());
  }
  w.alive_weight = total.value();
  return w;
}

Symbol majority_prediction(const WeightedAliveSet& w, const ModelClass& c) {
  if (w.alive.empty()) throw AllExcluded("no model is consistent with the observations");
  std::vector<double> probs(c.alphabet_size());
  std::vector<kernels::CompensatedSum> mass(c.alphabet_size());
  for (std::size_t i : w.alive) {
    c.model(i).predict(w.history, probs);
    mass[argmax_symbol(probs)].add(w.weights[i - 1]);
  }
  Symbol best = 0;
  for (Symbol s = 1; s < mass.size(); ++s) {
    if (mass[s].value() > mass[best].value()) best = s;
  }
  return best;
}

WeightedAliveSet majority_step(WeightedAliveSet w, const ModelClass& c, std::size_t t, Symbol observed) {
  if (t != w.history.size() + 1) throw std::invalid_argument("majority_step: steps must be consecutive");
  if (observed >= c.alphabet_size()) throw std::invalid_argument("symbol outside alphabet");
  const Symbol guess = majority_prediction(w, c);
  if (guess != observed) ++w.errors;
  w.last_prediction = guess;

  std::vector<double> probs(c.alphabet_size());
  std::erase_if(w.alive, [&](std::size_t i) {
    c.model(i).predict(w.history, probs);
    return probs[observed] <= 0.0;
  });
  kernels::CompensatedSum total;
  for (std::size_t i : w.alive) total.add(w.weights[i - 1]);
  w.alive_weight = total.value();
  w.history.push_back(observed);
  return w;
}

}  // namespace mdlp
