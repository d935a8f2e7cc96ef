#include "mdlp/model_class.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "mdlp/errors.hpp"

namespace mdlp {

namespace {
constexpr double kKraftSlack = 1e-12;
}

struct ModelClass::Impl {
  Generator generator;
  std::size_t cutoff = 0;
  bool infinite = false;
  ComplexityRule rule = ComplexityRule::two_log;
  double kraft_bound = kDefaultKraftBound;
  std::vector<double> codelengths;

  mutable std::mutex mutex;
  mutable std::vector<MeasurePtr> cache;
  mutable bool complete = false;
};

std::vector<double> assign_codelengths(const ComplexityAssignment& rule, std::size_t n) {
  std::vector<double> k(n);
  switch (rule.rule) {
    case ComplexityRule::two_log:
      for (std::size_t i = 0; i < n; ++i) k[i] = 2.0 * std::log2(static_cast<double>(i + 1));
      break;
    case ComplexityRule::uniform:
      for (auto& v : k) v = std::log2(static_cast<double>(n));
      break;
    case ComplexityRule::explicit_list:
      if (rule.bits.size() < n) {
        throw InvalidSpec("complexity.codelengths", "need " + std::to_string(n) + " entries, got " + std::to_string(rule.bits.size()));
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!(rule.bits[i] >= 0.0) || !std::isfinite(rule.bits[i])) {
          throw InvalidSpec("complexity.codelengths[" + std::to_string(i) + "]", "codelength must be finite and >= 0");
        }
        k[i] = rule.bits[i];
      }
      break;
  }
  return k;
}

namespace {

double kraft_sum(const std::vector<double>& k, std::size_t upto) {
  // Neumaier summation.
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < upto; ++i) {
    const double v = std::exp2(-k[i]);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void check_kraft(const std::vector<double>& k, double bound) {
  const double mass = kraft_sum(k, k.size());
  if (mass > bound + kKraftSlack) {
    throw InvalidSpec("complexity", "Kraft mass " + std::to_string(mass) + " exceeds bound " + std::to_string(bound));
  }
}

}  // namespace

ModelClass ModelClass::from_list(std::vector<MeasurePtr> models, const ComplexityAssignment& rule, double kraft_bound) {
  if (models.empty()) throw InvalidSpec("models", "class must contain at least one model");
  const std::size_t alphabet = models.front()->alphabet_size();
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!models[i]) throw InvalidSpec("models[" + std::to_string(i) + "]", "null model");
    if (models[i]->alphabet_size() != alphabet) {
      throw InvalidSpec("models[" + std::to_string(i) + "]", "alphabet size differs from the first model");
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->cutoff = models.size();
  impl->rule = rule.rule;
  impl->kraft_bound = kraft_bound;
  if (rule.rule == ComplexityRule::explicit_list && rule.bits.size() != models.size()) {
    throw InvalidSpec("complexity.codelengths", "need one entry per model (" + std::to_string(models.size()) +
                                                    "), got " + std::to_string(rule.bits.size()));
  }
  impl->codelengths = assign_codelengths(rule, models.size());
  check_kraft(impl->codelengths, kraft_bound);
  impl->cache = std::move(models);
  impl->complete = true;
  return ModelClass(std::move(impl));
}

ModelClass ModelClass::from_generator(Generator gen, std::size_t cutoff, const ComplexityAssignment& rule,
                                      double kraft_bound) {
  if (cutoff < 1) throw InvalidSpec("cutoff", "must be positive");
  if (rule.rule == ComplexityRule::uniform) {
    throw InvalidSpec("complexity", "uniform codelengths require a finite class");
  }
  auto impl = std::make_shared<Impl>();
  impl->generator = std::move(gen);
  impl->cutoff = cutoff;
  impl->infinite = true;
  impl->rule = rule.rule;
  impl->kraft_bound = kraft_bound;
  impl->codelengths = assign_codelengths(rule, cutoff);
  check_kraft(impl->codelengths, kraft_bound);
  impl->cache.resize(cutoff);
  return ModelClass(std::move(impl));
}

std::size_t ModelClass::size() const { return impl_->cutoff; }
bool ModelClass::is_infinite() const { return impl_->infinite; }
ComplexityRule ModelClass::rule() const { return impl_->rule; }
double ModelClass::kraft_bound() const { return impl_->kraft_bound; }
const std::vector<double>& ModelClass::codelengths() const { return impl_->codelengths; }

double ModelClass::codelength(std::size_t index) const {
  if (index < 1 || index > size()) throw std::out_of_range("model index " + std::to_string(index));
  return impl_->codelengths[index - 1];
}

MeasurePtr ModelClass::model_ptr(std::size_t index) const {
  if (index < 1 || index > size()) throw std::out_of_range("model index " + std::to_string(index));
  {
    std::lock_guard lock(impl_->mutex);
    if (auto& slot = impl_->cache[index - 1]) return slot;
  }
  MeasurePtr built = impl_->generator(index);
  if (!built) throw InvalidSpec("generator[" + std::to_string(index) + "]", "generator returned no model");
  std::lock_guard lock(impl_->mutex);
  auto& slot = impl_->cache[index - 1];
  if (!slot) slot = std::move(built);  // first writer wins
  return slot;
}

const std::vector<MeasurePtr>& ModelClass::enumerate() const {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->complete) return impl_->cache;
  }
  for (std::size_t i = 1; i <= size(); ++i) {
    const auto m = model_ptr(i);
    if (m->alphabet_size() != model_ptr(1)->alphabet_size()) {
      throw InvalidSpec("generator[" + std::to_string(i) + "]", "alphabet size differs from the first model");
    }
  }
  std::lock_guard lock(impl_->mutex);
  impl_->complete = true;
  return impl_->cache;
}

std::size_t ModelClass::alphabet_size() const { return model(1).alphabet_size(); }

bool ModelClass::is_deterministic() const {
  for (const auto& m : enumerate()) {
    if (!m->is_deterministic()) return false;
  }
  return true;
}

ModelClass ModelClass::with_truth(std::size_t index) const {
  if (index < 1 || index > size()) {
    throw InvalidSpec("truth", "index " + std::to_string(index) + " outside 1.." + std::to_string(size()));
  }
  ModelClass copy = *this;
  copy.truth_ = index;
  return copy;
}

double kraft_mass(const ModelClass& c, std::size_t upto) {
  if (upto > c.size()) throw std::invalid_argument("kraft_mass: upto exceeds the enumeration cutoff");
  return kraft_sum(c.codelengths(), upto);
}

double inverse_square_tail(std::size_t m) {
  // Sum directly up to N-1, then Euler-Maclaurin for sum_{i >= N} 1/i^2,
  // whose remainder is below 1e-16 for N >= 20.
  const std::size_t n = std::max<std::size_t>(m + 1, 20);
  double direct = 0.0;
  for (std::size_t i = n - 1; i > m; --i) direct += 1.0 / (static_cast<double>(i) * static_cast<double>(i));
  const double x = static_cast<double>(n);
  const double x2 = x * x;
  const double tail = 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) +
                      1.0 / (42.0 * x2 * x2 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x2 * x2 * x);
  return direct + tail;
}

std::optional<double> kraft_total(const ModelClass& c) {
  if (!c.is_infinite()) return kraft_mass(c, c.size());
  if (c.rule() == ComplexityRule::two_log) return std::numbers::pi * std::numbers::pi / 6.0;
  return std::nullopt;
}

TailWeight tail_weight(const ModelClass& c, std::size_t m) {
  if (c.is_infinite() && c.rule() == ComplexityRule::two_log) return {inverse_square_tail(m), false};
  if (m >= c.size()) return {0.0, c.is_infinite()};
  const auto& k = c.codelengths();
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = k.size(); i > m; --i) {
    const double v = std::exp2(-k[i - 1]);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return {sum + comp, c.is_infinite()};
}

std::size_t effective_size(const ModelClass& c, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("effective_size: eps must lie in (0,1)");
  const auto truth = c.truth_index();
  if (!truth) throw std::invalid_argument("effective_size: class has no designated truth");
  const double scale = std::exp2(c.codelength(*truth));
  auto ok = [&](std::size_t m) { return tail_weight(c, m).value * scale <= eps; };
  if (!ok(c.size())) {
    throw CutoffExhausted("no m <= " + std::to_string(c.size()) + " brings the tail weight below eps");
  }
  // The tail is non-increasing in m, so bisect for the first m that passes.
  std::size_t lo = 1, hi = c.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace mdlp
