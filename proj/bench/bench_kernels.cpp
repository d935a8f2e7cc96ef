// Serial reference versus OpenMP path for the parallel kernels. Prints wall
// time per kernel and whether the two paths agree bit for bit.
//
//   bench_kernels [--jobs N] [--reps R]

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "mdlp/config.hpp"
#include "mdlp/harness.hpp"
#include "mdlp/kernels.hpp"
#include "mdlp/metrics.hpp"
#include "mdlp/rl.hpp"
#include "mdlp/scenarios.hpp"

using namespace mdlp;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double seconds(int reps, F&& f) {
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

void line(const std::string& name, double serial, double parallel, bool same) {
  std::cout << name << "  serial=" << serial * 1e3 << "ms  parallel=" << parallel * 1e3
            << "ms  speedup=" << serial / parallel << "  identical=" << (same ? "yes" : "NO") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (!std::strcmp(argv[i], "--jobs")) kernels::set_threads(std::atoi(argv[i + 1]));
    if (!std::strcmp(argv[i], "--reps")) reps = std::atoi(argv[i + 1]);
  }
  std::cout << "threads=" << kernels::max_threads() << '\n';

  {
    std::vector<MeasurePtr> models;
    for (std::size_t i = 0; i < 20000; ++i) {
      models.push_back(build_family(FamilySpec::bernoulli((static_cast<double>(i) + 0.5) / 20000.0)));
    }
    RandomStream rng(1);
    const Sequence x = sample_continuation(*models[7000], {}, 200, rng);
    std::vector<double> a(models.size()), b(models.size());
    auto run = [&](std::vector<double>& lm, kernels::Exec exec) {
      std::fill(lm.begin(), lm.end(), 0.0);
      for (std::size_t t = 0; t < x.size(); ++t) {
        kernels::accumulate_log_predictive(models, std::span(x).first(t), x[t], lm, exec);
      }
    };
    const double s = seconds(reps, [&] { run(a, kernels::Exec::serial); });
    const double p = seconds(reps, [&] { run(b, kernels::Exec::parallel); });
    line("log-marginals (20000 models, 200 steps)", s, p, a == b);
  }
  {
    const auto p = build_family({MarkovSpec{2, {{0.9, 0.1}, {0.3, 0.7}, {0.5, 0.5}, {0.2, 0.8}}, {}}});
    const auto q = build_family(FamilySpec::bernoulli(0.6));
    const Sequence x{0, 1, 1};
    McEstimate ea, eb;
    const double s = seconds(reps, [&] { ea = dh_monte_carlo_unchecked(*p, *q, x, 12, 200000, 7, kernels::Exec::serial); });
    const double t = seconds(reps, [&] { eb = dh_monte_carlo_unchecked(*p, *q, x, 12, 200000, 7, kernels::Exec::parallel); });
    line("d_12 Monte-Carlo (2e5 samples)", s, t, ea.estimate == eb.estimate && ea.stderr_ == eb.stderr_);
  }
  {
    const auto env = rl::make_action_reward_env({0.1, 0.9});
    const auto pol = rl::make_stochastic_policy({0.3, 0.7});
    const rl::InteractionHistory hist;
    std::vector<double> a, b;
    const double s = seconds(reps, [&] { a = rl::rollout_returns(*env, *pol, hist, 0.5, 20, 100000, 3, kernels::Exec::serial); });
    const double t = seconds(reps, [&] { b = rl::rollout_returns(*env, *pol, hist, 0.5, 20, 100000, 3, kernels::Exec::parallel); });
    line("value rollouts (1e5 x 20 steps)", s, t, a == b);
  }
  {
    ExperimentConfig cfg = scenario_config("bernoulli-pair");
    cfg.trajectories = 200;
    std::vector<RunRow> a, b;
    const double s = seconds(1, [&] { a = run_experiment(cfg, kernels::Exec::serial); });
    const double t = seconds(1, [&] { b = run_experiment(cfg, kernels::Exec::parallel); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].selected == b[i].selected && (a[i].d_h == b[i].d_h || (a[i].d_h != a[i].d_h && b[i].d_h != b[i].d_h));
    }
    line("bernoulli-pair trajectories (200 x 1000)", s, t, same);
  }
  return 0;
}
