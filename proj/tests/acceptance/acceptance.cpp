// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "../brute_force.hpp"
#include "revpref/revpref.hpp"

namespace {

using namespace revpref;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> uniform_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (auto& x : out) x = u(rng);
  return out;
}

// 1. Oracle equivalence against exhaustive grids.
Outcome oracle_equivalence() {
  Rng rng(1001);
  const ExampleDistribution dist{3, 1.0, 2.0, 0.0, 2.0};
  double worst_lin = 0.0;
  int lin_fail = 0;
  for (int t = 0; t < 200; ++t) {
    const LinearValuation v(uniform_vec(rng, 3, 0.0, 1.0));
    const Example ex = sample_example(dist, rng);
    const double got = bundle_value(v, solve_linear(v, ex.prices, ex.budget));
    const double grid = testing::grid_optimum(v, ex.prices, ex.budget, 0.05);
    const double vmax = *std::max_element(v.values().begin(), v.values().end());
    const double gap = std::abs(got - grid);
    worst_lin = std::max(worst_lin, gap / std::max(vmax, 1e-300));
    if (gap > 0.05 * vmax + 1e-12) ++lin_fail;
  }
  double worst_sep = 0.0;
  int sep_fail = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<QuadraticUtility> goods(3);
    for (auto& g : goods) {
      g.b = unit(rng);
      g.a = g.b + (1.0 - g.b) * unit(rng);
    }
    const SeparableConcaveValuation v(goods);
    const Example ex = sample_example(dist, rng);
    const double got = bundle_value(v, solve_separable(v, ex.prices, ex.budget));
    const double grid = testing::grid_optimum(v, ex.prices, ex.budget, 0.01);
    const double gap = std::abs(got - grid);
    worst_sep = std::max(worst_sep, gap);
    if (gap > 1e-2) ++sep_fail;
  }
  return {lin_fail == 0 && sep_fail == 0,
          fmt("linear: %d/200 outside 0.05*max(v) (worst %.4f*max(v)); separable: %d/200 outside 1e-2 (worst %.2e)",
              lin_fail, worst_lin, sep_fail, worst_sep)};
}

// 2. x*_i > x*_j implies v_i/p_i >= v_j/p_j.
Outcome purchase_order() {
  Rng rng(1002);
  std::uniform_int_distribution<std::size_t> pick_n(1, 6);
  long violations = 0;
  long pairs = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = pick_n(rng);
    const LinearValuation v(uniform_vec(rng, n, 0.0, 1.0), true);
    const Example ex = sample_example(ExampleDistribution{n, 1.0, 2.0, 0.0, 2.0 * static_cast<double>(n)}, rng);
    const Observation obs = make_observation(v, ex);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (obs.bundle[i] > obs.bundle[j]) {
          ++pairs;
          if (v[i] / ex.prices[i] < v[j] / ex.prices[j]) ++violations;
        }
      }
    }
  }
  return {violations == 0, fmt("%ld violations over %ld ordered pairs in 10000 observations", violations, pairs)};
}

TrialConfig all_pairs_config() {
  TrialConfig c;
  c.learner = LearnerKind::all_pairs;
  c.n = 5;
  c.delta = 0.1;
  c.epsilon = 0.1;
  c.c = 1.0;
  c.test_size = 1000;
  return c;
}

// 3 and 4 share the same trials.
std::pair<Outcome, Outcome> all_pairs_accuracy_and_soundness() {
  const TrialConfig base = all_pairs_config();
  const std::uint64_t m = required_samples(base.n, base.delta, base.c);
  const int trials = 50;
  std::vector<double> errors;
  long violations = 0;
  long checks = 0;
  bool matches_harness = true;
  for (int t = 0; t < trials; ++t) {
    TrialConfig c = base;
    c.seed = trial_seed(20240, static_cast<std::size_t>(t));
    Rng instance_rng = fork_rng(c.seed, kInstanceStream);
    const Instance inst = generate_instance(c, instance_rng);
    const auto& v = std::get<LinearValuation>(inst.truth);
    Rng train_rng = fork_rng(c.seed, kTrainStream);
    AllPairsLearner model(c.n);
    for (std::uint64_t s = 0; s < m; ++s) {
      model.observe(observe(inst.truth, sample_example(inst.dist, train_rng)));
      ++checks;
      if (!model.bounds().satisfied_by(v.values(), 0.0)) ++violations;
    }
    model.finalize();
    Rng test_rng = fork_rng(c.seed, kTestStream);
    const auto stats = evaluate([&](const Example& ex, Rng&) { return model.predict(ex.prices, ex.budget); },
                                inst.truth, inst.dist, c.test_size, c.epsilon, test_rng);
    errors.push_back(stats.exact_error);
    if (t == 0) {
      c.m = m;
      matches_harness = run_trial(c).exact_error == stats.exact_error;
    }
  }
  double mean = 0.0;
  int within = 0;
  for (double e : errors) {
    mean += e;
    if (e <= base.delta) ++within;
  }
  mean /= trials;
  const double worst = *std::max_element(errors.begin(), errors.end());
  Outcome thm{mean <= base.delta && within >= 45 && matches_harness,
              fmt("m=%llu: mean exact error %.4f, %d/50 trials <= 0.1, worst %.4f%s",
                  static_cast<unsigned long long>(m), mean, within, worst,
                  matches_harness ? "" : " (harness mismatch)")};
  Outcome sound{violations == 0, fmt("%ld violations over %ld checkpoints", violations, checks)};
  return {thm, sound};
}

// 5. Disjunction on found cases for the discretized learner.
Outcome separable_disjunction() {
  TrialConfig c;
  c.learner = LearnerKind::separable;
  c.n = 3;
  c.curvature = 1.0;
  c.epsilon = 0.2;
  c.delta = 0.2;
  c.test_size = 1000;
  const ExampleDistribution dist = c.distribution();
  const int k = choose_k(c.curvature, c.epsilon, dist.max_budget_per_price());
  c.k = k;
  // Largest two-decimal C keeping m <= 1e5.
  double cc = 1.0;
  while (required_samples_separable(c.n, k, c.delta, cc) > 100000) cc -= 0.01;
  cc = std::round(cc * 100.0) / 100.0;
  c.c = cc;
  const std::uint64_t m = required_samples_separable(c.n, k, c.delta, cc);
  c.m = m;

  const int instances = 10;
  long found = 0;
  long tested = 0;
  long holds = 0;
  for (int t = 0; t < instances; ++t) {
    c.seed = trial_seed(5150, static_cast<std::size_t>(t));
    Rng instance_rng = fork_rng(c.seed, kInstanceStream);
    const Instance inst = generate_instance(c, instance_rng);
    const auto& v = std::get<SeparableConcaveValuation>(inst.truth);
    const TrainingOutcome trained = train_model(c, inst);
    const auto& grid = std::get<DerivativeGrid>(trained.model);
    Rng test_rng = fork_rng(c.seed, kTestStream);
    Rng learner_rng = fork_rng(c.seed, kLearnerStream);
    for (std::size_t q = 0; q < c.test_size; ++q) {
      const Example ex = sample_example(inst.dist, test_rng);
      ++tested;
      const auto pred = predict_detailed(grid, ex.prices, ex.budget, learner_rng);
      if (!pred.found()) continue;
      ++found;
      const Bundle best = solve_separable(v, ex.prices, ex.budget);
      bool coordinatewise = true;
      for (std::size_t i = 0; i < c.n; ++i) coordinatewise = coordinatewise && pred.bundle[i] >= best[i] - c.epsilon;
      const bool value_ok = bundle_value(v, pred.bundle) >= bundle_value(v, best) - c.epsilon;
      if (coordinatewise || value_ok) ++holds;
    }
  }
  const double rate = found ? static_cast<double>(holds) / found : 0.0;
  return {found > 0 && rate >= 1.0 - 2.0 * c.delta,
          fmt("k=%d, C=%.2f, m=%llu: disjunction holds on %.4f of %ld found cases (NotFound rate %.4f over %ld)", k, cc,
              static_cast<unsigned long long>(m), rate, found, 1.0 - static_cast<double>(found) / tested, tested)};
}

// 6. Every non-epsilon-optimal grid hypothesis gets a witnessing pair.
Outcome witness_completeness() {
  Rng rng(1006);
  const double epsilon = 0.1;
  const ExampleDistribution dist{3, 1.0, 2.0, 0.0, 3.0};
  long rejected = 0;
  long failures = 0;
  long accepted_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const LinearValuation v(uniform_vec(rng, 3, 0.0, 1.0), true);
    const Example ex = sample_example(dist, rng);
    const double best = bundle_value(v, solve_linear(v, ex.prices, ex.budget));
    for (int a = 0; a <= 10; ++a) {
      for (int b = 0; b <= 10; ++b) {
        for (int c = 0; c <= 10; ++c) {
          const std::vector<double> guess{a / 10.0, b / 10.0, c / 10.0};
          const Bundle x = solve_linear(LinearValuation(guess), ex.prices, ex.budget);
          const bool optimal_enough = bundle_value(v, x) >= best - epsilon;
          const Feedback fb = feedback(v, ex.prices, ex.budget, x, epsilon, dist.price_ratio());
          if (fb.accepted) {
            if (!optimal_enough) ++accepted_bad;
            continue;
          }
          ++rejected;
          const bool witnessed = std::any_of(fb.pairs.begin(), fb.pairs.end(), [&](const PreferencePair& pr) {
            return guess[pr.i] / ex.prices[pr.i] <= guess[pr.j] / ex.prices[pr.j];
          });
          if (!witnessed) ++failures;
        }
      }
    }
  }
  return {failures == 0 && accepted_bad == 0,
          fmt("%ld rejections, %ld without a witnessing pair, %ld bad bundles accepted", rejected, failures,
              accepted_bad)};
}

bool inside_exact(const Polytope& k, std::span<const double> v) {
  for (double c : v) {
    if (c < 0.0 || c > 1.0) return false;
  }
  for (const auto& h : k.halfspaces()) {
    if (h.slack(v) < 0.0) return false;
  }
  return true;
}

// 7. Cutting-plane learner: soundness, progress, budget and final accuracy.
Outcome polytope_learner() {
  const double delta = 0.2;
  const double epsilon = 0.2;
  long unsound = 0;
  long slow = 0;
  long over_budget = 0;
  long bad_error = 0;
  long runs = 0;
  long iterations = 0;
  double worst_error = 0.0;
  double half_width = 0.0;
  for (std::size_t n = 2; n <= 4; ++n) {
    for (int r = 0; r < 3; ++r) {
      TrialConfig c;
      c.learner = LearnerKind::polytope;
      c.n = n;
      c.delta = delta;
      c.epsilon = epsilon;
      c.seed = trial_seed(7007 + n, static_cast<std::size_t>(r));
      Rng instance_rng = fork_rng(c.seed, kInstanceStream);
      const Instance inst = generate_instance(c, instance_rng);
      const auto& v = std::get<LinearValuation>(inst.truth);
      const LinearAgent agent(v, epsilon, inst.dist.price_ratio());
      Rng train_rng = fork_rng(c.seed, kTrainStream);
      PolytopeTrainingOptions opts;
      std::vector<IterationRecord> records;
      opts.observer = [&](const IterationRecord& rec, const Polytope& k, const Polytope& k_cut) {
        if (!inside_exact(k, v.values()) || !inside_exact(k_cut, v.values())) ++unsound;
        records.push_back(rec);
      };
      const auto trained = train_polytope(agent, inst.dist, epsilon, delta, train_rng, opts);
      half_width = trained.half_width;
      // All but the last record continued training, unless the cap ended it.
      const std::size_t continuing = trained.cap_reached ? records.size() : records.size() - 1;
      for (std::size_t i = 0; i < continuing; ++i) {
        if (records[i].volume_ratio > 1.0 - delta + 2.0 * trained.half_width) ++slow;
      }
      if (trained.examples_consumed > trained.batch_size * trained.iteration_cap) ++over_budget;
      Rng test_rng = fork_rng(c.seed, kTestStream);
      Rng learner_rng = fork_rng(c.seed, kLearnerStream);
      const auto stats = evaluate(
          [&](const Example& ex, Rng&) { return predict_polytope(trained.body, ex.prices, ex.budget, learner_rng); },
          inst.truth, inst.dist, 1000, epsilon, test_rng);
      worst_error = std::max(worst_error, stats.epsilon_error);
      if (stats.epsilon_error > 2.0 * delta) ++bad_error;
      iterations += static_cast<long>(records.size());
      ++runs;
    }
  }
  return {unsound == 0 && slow == 0 && over_budget == 0 && bad_error == 0,
          fmt("%ld runs (n=2..4), %ld iterations: %ld unsound, %ld slow continuing iterations (limit %.4f), %ld over "
              "example budget, worst eps-error %.4f (limit %.2f)",
              runs, iterations, unsound, slow, 1.0 - delta + 2.0 * half_width, over_budget, worst_error, 2.0 * delta)};
}

// 8. Hit-and-run on the unit square.
Outcome sampler_uniformity() {
  const std::size_t n = 2;
  const std::size_t samples = 50000;
  const std::size_t steps = default_walk_steps(n);
  Polytope square(n);
  Rng rng(1008);
  std::vector<std::vector<double>> coords(n);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto v = hit_and_run(square, steps, rng);
    for (std::size_t i = 0; i < n; ++i) coords[i].push_back(v[i]);
  }
  double worst_mean = 0.0;
  double worst_ks = 0.0;
  for (auto& c : coords) {
    double mean = 0.0;
    for (double x : c) mean += x;
    mean /= static_cast<double>(samples);
    worst_mean = std::max(worst_mean, std::abs(mean - 0.5));
    std::sort(c.begin(), c.end());
    double ks = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double lo = static_cast<double>(k) / samples;
      const double hi = static_cast<double>(k + 1) / samples;
      ks = std::max({ks, std::abs(c[k] - lo), std::abs(hi - c[k])});
    }
    worst_ks = std::max(worst_ks, ks);
  }
  Polytope fresh(n);
  const std::vector<Halfspace> cut{Halfspace::feedback(n, 0, 1, 1.0, 1.0)};
  const double ratio = estimate_volume_ratio(fresh, cut, samples, rng, steps);
  return {worst_mean <= 0.02 && worst_ks <= 0.02 && std::abs(ratio - 0.5) <= 0.03,
          fmt("max |mean-0.5| %.4f, max KS %.4f, cut-square volume ratio %.4f", worst_mean, worst_ks, ratio)};
}

// 9. Error falls with m.
Outcome sample_complexity_trend() {
  TrialConfig c = all_pairs_config();
  c.seed = 909;
  const std::vector<std::uint64_t> ms{50, 200, 800, 1381, 3200};
  const auto rows = sweep(c, ms, 30);
  int inversions = 0;
  std::string series;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    series += fmt("%s%llu:%.4f", r ? " " : "", static_cast<unsigned long long>(rows[r].m), rows[r].exact_err_mean);
    if (r > 0 && !(rows[r].exact_err_mean < rows[r - 1].exact_err_mean)) ++inversions;
  }
  return {inversions <= 1, fmt("mean exact error by m: %s; %d inversions", series.c_str(), inversions)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o, double seconds) {
    std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto timed = [](auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto result = fn();
    return std::make_pair(result, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };

  {
    auto [o, s] = timed(oracle_equivalence);
    report(1, "oracle equivalence", o, s);
  }
  {
    auto [o, s] = timed(purchase_order);
    report(2, "purchase order", o, s);
  }
  {
    auto [pair, s] = timed(all_pairs_accuracy_and_soundness);
    report(3, "all-pairs accuracy at formula m", pair.first, s);
    report(4, "ratio bound soundness", pair.second, 0.0);
  }
  {
    auto [o, s] = timed(separable_disjunction);
    report(5, "separable disjunction", o, s);
  }
  {
    auto [o, s] = timed(witness_completeness);
    report(6, "feedback witness completeness", o, s);
  }
  {
    auto [o, s] = timed(polytope_learner);
    report(7, "polytope learner", o, s);
  }
  {
    auto [o, s] = timed(sampler_uniformity);
    report(8, "hit-and-run uniformity", o, s);
  }
  {
    auto [o, s] = timed(sample_complexity_trend);
    report(9, "sample-complexity trend", o, s);
  }
  std::printf("%d/9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
