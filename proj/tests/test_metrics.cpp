#include <doctest.h>

#include <cmath>

#include "mdlp/errors.hpp"
#include "mdlp/metrics.hpp"
#include "support.hpp"

using namespace mdlp;
using testsupport::Gen;

namespace {

MeasurePtr bern(double theta) { return build_family(FamilySpec::bernoulli(theta)); }

struct Pair {
  FamilySpec p_spec, q_spec;
  MeasurePtr p, q;
  Sequence x;  // positive under both
};

// Random pair over a shared alphabet, conditioned on a prefix both measures allow.
Pair random_pair(Gen& g, std::size_t alphabet) {
  while (true) {
    Pair out{g.family(alphabet, 0.15), g.family(alphabet, 0.15), nullptr, nullptr, {}};
    out.p = build_family(out.p_spec);
    out.q = build_family(out.q_spec);
    out.x = testsupport::reference_sample(out.p_spec, g.below(9), g);
    if (testsupport::reference_prob(out.q_spec, out.x) > 0.0) return out;
  }
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("d_h examples") {
  const auto a = bern(0.5), b = bern(0.75);
  CHECK(dh_exact(*a, *a, Sequence{1, 0}, 3) == 0.0);
  CHECK(dh_exact(*a, *b, Sequence{1, 1, 0}, 1) == doctest::Approx(0.5));
  CHECK(dh_exact(*a, *b, {}, 2) == doctest::Approx(5.0 / 16 + 1.0 / 16 + 1.0 / 16 + 3.0 / 16));
  CHECK(dh_exact(*a, *b, {}, 2) == doctest::Approx(0.625));
}

TEST_CASE("block distribution") {
  MarkovSpec m;
  m.order = 1;
  m.rows = {{0.9, 0.1}, {0.2, 0.8}};
  const auto chain = build_family({m});
  const auto probs = block_distribution(*chain, Sequence{1}, 2);
  REQUIRE(probs.size() == 4);
  CHECK(probs[0] == doctest::Approx(0.2 * 0.9));  // 00
  CHECK(probs[1] == doctest::Approx(0.2 * 0.1));  // 01
  CHECK(probs[2] == doctest::Approx(0.8 * 0.2));  // 10
  CHECK(probs[3] == doctest::Approx(0.8 * 0.8));  // 11
  CHECK_THROWS_AS(block_distribution(*chain, {}, 11, 1024), BudgetExceeded);
  CHECK_NOTHROW(block_distribution(*chain, {}, 10, 1024));
}

TEST_CASE("d_h errors") {
  const auto ones = build_family(FamilySpec::deterministic({}, 1));
  CHECK_THROWS_AS(dh_exact(*ones, *bern(0.5), Sequence{0}, 1), UndefinedConditional);
  const auto three = build_family({CategoricalSpec{{0.2, 0.3, 0.5}}});
  CHECK_THROWS_AS(dh_exact(*three, *bern(0.5), {}, 1), std::invalid_argument);
  RandomStream rng(1);
  CHECK_THROWS_AS(dh_monte_carlo(*bern(0.5), *bern(0.5), {}, 1, 0, rng), std::invalid_argument);
}

TEST_CASE("monte carlo examples") {
  const auto a = bern(0.5), b = bern(0.75);
  RandomStream rng(11);
  const auto same = dh_monte_carlo(*a, *a, Sequence{1}, 4, 1000, rng);
  CHECK(same.estimate == 0.0);
  CHECK(same.stderr_ == 0.0);

  const auto two = dh_monte_carlo(*a, *b, {}, 2, 100000, rng);
  CHECK(two.samples == 100000);
  CHECK(std::abs(two.estimate - 0.625) <= 4.0 * two.stderr_);

  const auto twelve = dh_monte_carlo(*a, *b, {}, 12, 100000, rng);
  const double exact = dh_exact(*a, *b, {}, 12);
  CHECK(std::abs(twelve.estimate - exact) <= 4.0 * twelve.stderr_);
}

TEST_CASE("monte carlo sees mass where P is zero") {
  // P = 1^inf, Q = Bern(1/2): d_1 = |0 - 1/2| + |1 - 1/2| = 1
  const auto p = build_family(FamilySpec::deterministic({}, 1));
  RandomStream rng(3);
  const auto est = dh_monte_carlo(*p, *bern(0.5), {}, 1, 50000, rng);
  CHECK(std::abs(est.estimate - 1.0) <= 4.0 * est.stderr_);
}

TEST_CASE("monte carlo is independent of the execution path") {
  const auto a = bern(0.4);
  MarkovSpec m;
  m.order = 1;
  m.rows = {{0.7, 0.3}, {0.1, 0.9}};
  const auto b = build_family({m});
  const auto s = dh_monte_carlo_unchecked(*a, *b, Sequence{0, 1}, 7, 20000, 99, kernels::Exec::serial);
  const auto p = dh_monte_carlo_unchecked(*a, *b, Sequence{0, 1}, 7, 20000, 99, kernels::Exec::parallel);
  CHECK(s.estimate == p.estimate);
  CHECK(s.stderr_ == p.stderr_);
}

TEST_CASE("property: exact d_h matches brute force") {
  Gen g(401);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t alphabet = 2 + g.below(3);
    const auto pr = random_pair(g, alphabet);
    const std::size_t h = 1 + g.below(alphabet == 2 ? 8 : 4);
    CHECK(std::abs(dh_exact(*pr.p, *pr.q, pr.x, h) - testsupport::reference_dh(*pr.p, *pr.q, pr.x, h)) <= 1e-9);
  }
}

TEST_CASE("property: range and monotonicity in h") {
  Gen g(402);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t alphabet = 2 + g.below(3);
    const auto pr = random_pair(g, alphabet);
    double prev = 0.0;
    for (std::size_t h = 1; h <= 6; ++h) {
      const double d = dh_exact(*pr.p, *pr.q, pr.x, h);
      CHECK(d >= prev - 1e-12);
      CHECK(d <= 2.0 + 1e-12);
      prev = d;
    }
  }
}

TEST_CASE("property: triangle inequality") {
  Gen g(403);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t alphabet = 2 + g.below(3);
    const auto pq = random_pair(g, alphabet);
    FamilySpec r_spec;
    do {
      r_spec = g.family(alphabet, 0.15);
    } while (testsupport::reference_prob(r_spec, pq.x) == 0.0);
    const auto r = build_family(r_spec);
    const std::size_t h = 1 + g.below(4);
    const double pr = dh_exact(*pq.p, *r, pq.x, h);
    CHECK(pr <= dh_exact(*pq.p, *pq.q, pq.x, h) + dh_exact(*pq.q, *r, pq.x, h) + 1e-12);
  }
}

TEST_CASE("property: monte carlo agrees with exact") {
  Gen g(404);
  RandomStream rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t alphabet = 2 + g.below(3);
    const auto pr = random_pair(g, alphabet);
    const std::size_t h = 1 + g.below(alphabet == 2 ? 12 : 6);
    const auto est = dh_monte_carlo(*pr.p, *pr.q, pr.x, h, 20000, rng);
    const double exact = dh_exact(*pr.p, *pr.q, pr.x, h);
    CHECK(std::abs(est.estimate - exact) <= 4.0 * est.stderr_ + 1e-12);
  }
}

TEST_CASE("cumulative d_h") {
  std::vector<TrajectoryDistances> zero(3, TrajectoryDistances{std::vector<double>(5, 0.0), {}, Estimator::exact, 0});
  auto report = cumulative_dh("mdl", 1, zero);
  CHECK(report.cumulative.back() == 0.0);
  CHECK(report.trajectories == 3);

  std::vector<TrajectoryDistances> runs = {
      {{0.5, 0.25, 0.0}, {}, Estimator::exact, 2},
      {{1.0, 0.5, 0.25}, {}, Estimator::exact, 4},
  };
  report = cumulative_dh("bayes", 1, runs);
  // per-trajectory totals 0.75 and 1.75
  CHECK(report.cumulative.back() == doctest::Approx(1.25));
  CHECK(report.cumulative_stderr.back() == doctest::Approx(0.5));
  CHECK(report.cumulative[0] == doctest::Approx(0.75));
  CHECK(report.steps[1].value == doctest::Approx(0.375));
  CHECK(report.errors_mean == doctest::Approx(3.0));
  CHECK(report.errors_max == 4);

  CHECK(cumulative_dh("x", 1, {}).cumulative.empty());
}

TEST_CASE("log ratio trace examples") {
  const auto a = bern(0.3);
  RandomStream rng(5);
  const Sequence omega = sample_continuation(*a, {}, 200, rng);
  const auto same = log_ratio_trace(*a, *a, omega);
  for (double v : same.values) CHECK(v == 0.0);
  CHECK_FALSE(same.absorbed_at);

  const auto q = build_family(FamilySpec::deterministic({}, 1));
  const auto p = build_family(ones_then_zeros(5));
  const auto trace = log_ratio_trace(*q, *p, Sequence{1, 1, 1, 1, 1, 0, 0, 0});
  for (std::size_t l = 0; l <= 5; ++l) CHECK(trace.values[l] == 0.0);
  REQUIRE(trace.absorbed_at);
  CHECK(*trace.absorbed_at == 6);
  for (std::size_t l = 6; l < trace.values.size(); ++l) {
    CHECK(std::isinf(trace.values[l]));
    CHECK(trace.values[l] < 0.0);
  }
}

TEST_CASE("log ratio drift is minus the KL divergence") {
  // log2 Bern(3/4)(x) / Bern(1/2)(x) per step: +log2(3/2) on a one, -1 on a zero
  const auto p = bern(0.5), q = bern(0.75);
  const std::size_t n = 10000;
  RandomStream rng(6);
  const Sequence omega = sample_continuation(*p, {}, n, rng);
  const auto trace = log_ratio_trace(*q, *p, omega);
  const double kl = 0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(0.5 / 0.25);
  CHECK(kl == doctest::Approx(0.2075).epsilon(1e-3));
  const double step_sd = 0.5 * (std::log2(1.5) + 1.0);
  const double se = step_sd / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(trace.last / static_cast<double>(n) + kl) <= 4.0 * se);
}

TEST_CASE("property: finite-horizon ratio exceedance") {
  // P[max_l Q(x_1:l)/P(x_1:l) >= c] <= 1/c
  Gen g(405);
  for (int trial = 0; trial < 3; ++trial) {
    const auto p_spec = g.family(2), q_spec = g.family(2);
    const auto p = build_family(p_spec), q = build_family(q_spec);
    const std::size_t runs = 300, len = 300;
    for (double c : {2.0, 4.0, 8.0}) {
      RandomStream rng(derive_seed(405, static_cast<std::uint64_t>(trial)));
      double hits = 0.0;
      for (std::size_t r = 0; r < runs; ++r) {
        const Sequence omega = sample_continuation(*p, {}, len, rng);
        const auto trace = log_ratio_trace(*q, *p, omega);
        double top = -std::numeric_limits<double>::infinity();
        for (double v : trace.values) top = std::max(top, v);
        if (top >= std::log2(c)) hits += 1.0;
      }
      const double freq = hits / runs;
      const double se = std::sqrt(std::max(freq * (1.0 - freq), 1.0 / runs) / runs);
      CHECK(freq <= 1.0 / c + 4.0 * se);
    }
  }
}

}  // TEST_SUITE
