#pragma once

// Seeded generators and reference implementations used by the tests. The
// reference code works from the family definitions directly and shares no
// code with the library beyond the FamilySpec types.

#include <cmath>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "mdlp/measures.hpp"

namespace testsupport {

using mdlp::FamilySpec;
using mdlp::Sequence;
using mdlp::Symbol;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::uint64_t u64() { return rng_(); }

  // Random point of the simplex; with probability zero_rate each entry is 0
  // (at least one entry stays positive).
  std::vector<double> simplex(std::size_t n, double zero_rate = 0.0) {
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& v : p) {
      v = coin(zero_rate) ? 0.0 : 0.05 + uniform();
      total += v;
    }
    if (total == 0.0) {
      p[below(n)] = 1.0;
      return p;
    }
    for (auto& v : p) v /= total;
    return p;
  }

  Sequence sequence(std::size_t len, std::size_t alphabet) {
    Sequence x(len);
    for (auto& s : x) s = static_cast<Symbol>(below(alphabet));
    return x;
  }

  // Random family over the given alphabet. Oscillating Bernoulli only on binary alphabets.
  FamilySpec family(std::size_t alphabet, double zero_rate = 0.0, int depth = 0) {
    const std::size_t kinds = depth == 0 ? 5 : 3;
    switch (below(kinds)) {
      case 0:
        return {mdlp::CategoricalSpec{simplex(alphabet, zero_rate)}};
      case 1: {
        mdlp::MarkovSpec m;
        m.order = 1 + below(2);
        std::size_t contexts = 1;
        for (std::size_t k = 0; k < m.order; ++k) contexts *= alphabet;
        for (std::size_t c = 0; c < contexts; ++c) m.rows.push_back(simplex(alphabet, zero_rate));
        if (coin()) m.initial = simplex(alphabet, zero_rate);
        return {m};
      }
      case 2: {
        mdlp::DeterministicSpec d;
        d.alphabet = alphabet;
        d.prefix = sequence(below(6), alphabet);
        d.tail = static_cast<Symbol>(below(alphabet));
        return {d};
      }
      case 3:
        if (alphabet == 2) return {mdlp::OscillatingBernoulliSpec{0.2 + 0.6 * uniform(), uniform(), 0.01}};
        return {mdlp::CategoricalSpec{simplex(alphabet, zero_rate)}};
      default: {
        mdlp::BranchingSpec b;
        b.first = simplex(alphabet, zero_rate);
        for (std::size_t a = 0; a < alphabet; ++a) b.branches.push_back(family(alphabet, zero_rate, depth + 1));
        return {b};
      }
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// ---- reference predictive distributions ---------------------------------------

inline std::vector<double> reference_step(const FamilySpec& spec, const Sequence& x);

namespace detail {

inline std::vector<double> step(const mdlp::CategoricalSpec& s, const Sequence&) { return s.probs; }

inline std::vector<double> step(const mdlp::DeterministicSpec& s, const Sequence& x) {
  std::vector<double> p(s.alphabet, 0.0);
  const std::size_t t = x.size();
  p[t < s.prefix.size() ? s.prefix[t] : s.tail] = 1.0;
  return p;
}

inline std::vector<double> step(const mdlp::MarkovSpec& s, const Sequence& x) {
  const std::size_t a = s.rows.front().size();
  if (x.size() < s.order) {
    if (s.initial.empty()) return std::vector<double>(a, 1.0 / static_cast<double>(a));
    return s.initial;
  }
  // most recent symbol least significant
  std::size_t ctx = 0;
  std::size_t scale = 1;
  for (std::size_t k = 0; k < s.order; ++k) {
    ctx += x[x.size() - 1 - k] * scale;
    scale *= a;
  }
  return s.rows[ctx];
}

inline std::vector<double> step(const mdlp::OscillatingBernoulliSpec& s, const Sequence& x) {
  const double t = static_cast<double>(x.size() + 1);
  const double sign = (x.size() + 1) % 2 == 0 ? 1.0 : -1.0;
  double theta = s.limit + sign * s.amplitude / std::sqrt(t);
  theta = std::min(std::max(theta, s.floor), 1.0 - s.floor);
  return {1.0 - theta, theta};
}

inline std::vector<double> step(const mdlp::BranchingSpec& s, const Sequence& x) {
  if (x.empty()) return s.first;
  const Sequence rest(x.begin() + 1, x.end());
  return reference_step(s.branches[x.front()], rest);
}

}  // namespace detail

inline std::vector<double> reference_step(const FamilySpec& spec, const Sequence& x) {
  return std::visit([&](const auto& s) { return detail::step(s, x); }, spec.params);
}

// Product of reference predictives (as a plain probability).
inline double reference_prob(const FamilySpec& spec, const Sequence& x) {
  double p = 1.0;
  Sequence prefix;
  for (Symbol s : x) {
    p *= reference_step(spec, prefix)[s];
    prefix.push_back(s);
  }
  return p;
}

// Calls f(z) for every z in X^h, lexicographically.
template <class F>
void for_each_block(std::size_t alphabet, std::size_t h, F&& f) {
  Sequence z(h, 0);
  while (true) {
    f(static_cast<const Sequence&>(z));
    std::size_t k = h;
    while (k > 0 && ++z[k - 1] == alphabet) z[--k] = 0;
    if (k == 0) return;
  }
}

// Conditional block probability P(z | x) from the chain rule on the measure's own predictive.
inline double measure_conditional(const mdlp::Measure& m, const Sequence& x, const Sequence& z) {
  std::vector<double> probs(m.alphabet_size());
  Sequence buf = x;
  double p = 1.0;
  for (Symbol s : z) {
    m.predict(buf, probs);
    p *= probs[s];
    buf.push_back(s);
  }
  return p;
}

// d_h by brute force: sum over z of |P(z|x) - Q(z|x)|.
inline double reference_dh(const mdlp::Measure& p, const mdlp::Measure& q, const Sequence& x, std::size_t h) {
  double total = 0.0;
  for_each_block(p.alphabet_size(), h, [&](const Sequence& z) {
    total += std::abs(measure_conditional(p, x, z) - measure_conditional(q, x, z));
  });
  return total;
}

// A sequence drawn from the reference predictive.
inline Sequence reference_sample(const FamilySpec& spec, std::size_t len, Gen& g) {
  Sequence x;
  for (std::size_t t = 0; t < len; ++t) {
    const auto p = reference_step(spec, x);
    double u = g.uniform();
    std::size_t s = 0;
    while (s + 1 < p.size() && (u >= p[s] || p[s] == 0.0)) {
      u -= p[s];
      ++s;
    }
    while (p[s] == 0.0) s = (s + 1) % p.size();
    x.push_back(static_cast<Symbol>(s));
  }
  return x;
}

}  // namespace testsupport
