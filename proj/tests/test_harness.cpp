#include <gtest/gtest.h>

#include <sstream>

#include "revpref/harness.hpp"

namespace revpref {
namespace {

TrialConfig small_config(LearnerKind learner) {
  TrialConfig c;
  c.learner = learner;
  c.n = 3;
  c.delta = 0.2;
  c.epsilon = 0.2;
  c.test_size = 200;
  c.seed = 99;
  return c;
}

TEST(ParseLearner, Names) {
  EXPECT_EQ(parse_learner("all_pairs"), LearnerKind::all_pairs);
  EXPECT_EQ(parse_learner("separable"), LearnerKind::separable);
  EXPECT_EQ(parse_learner("polytope"), LearnerKind::polytope);
  EXPECT_THROW(parse_learner("svm"), std::invalid_argument);
  EXPECT_STREQ(to_string(LearnerKind::separable), "separable");
}

TEST(TrialConfig, Validation) {
  auto c = small_config(LearnerKind::all_pairs);
  EXPECT_NO_THROW(c.validate());
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config(LearnerKind::polytope);
  c.delta = 0.6;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config(LearnerKind::all_pairs);
  c.p_min = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(GenerateInstance, SeparableIsNormalizedAndConcave) {
  auto c = small_config(LearnerKind::separable);
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto inst = generate_instance(c, rng);
    const auto& v = std::get<SeparableConcaveValuation>(inst.truth);
    EXPECT_LE(v.full_value(), 1.0 + 1e-12);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_GE(v[i].a, v[i].b);
  }
}

TEST(ValuesMatch, RelativeTolerance) {
  EXPECT_TRUE(values_match(1.0, 1.0 + 1e-10));
  EXPECT_FALSE(values_match(1.0, 1.0 + 1e-6));
  EXPECT_TRUE(values_match(0.0, 0.0));
}

TEST(Evaluate, PerfectPredictorHasNoError) {
  const Valuation truth = LinearValuation({0.2, 0.7, 0.4}, true);
  const ExampleDistribution dist{3, 1.0, 2.0, 0.0, 2.0};
  Rng rng(2);
  const auto stats = evaluate(
      [&](const Example& ex, Rng&) { return solve_linear(std::get<LinearValuation>(truth), ex.prices, ex.budget); },
      truth, dist, 300, 0.1, rng);
  EXPECT_EQ(stats.exact_error, 0.0);
  EXPECT_EQ(stats.epsilon_error, 0.0);
  const auto bad = evaluate([&](const Example& ex, Rng&) { return Bundle(ex.prices.size()); }, truth, dist, 300, 0.1,
                            rng);
  EXPECT_GT(bad.exact_error, 0.5);
}

TEST(RunTrial, DeterministicForSeed) {
  for (auto learner : {LearnerKind::all_pairs, LearnerKind::separable}) {
    auto c = small_config(learner);
    c.m = 300;
    if (learner == LearnerKind::separable) c.k = 5;
    const auto a = run_trial(c);
    const auto b = run_trial(c);
    EXPECT_EQ(a.exact_error, b.exact_error);
    EXPECT_EQ(a.epsilon_error, b.epsilon_error);
    EXPECT_EQ(a.notfound_rate, b.notfound_rate);
    EXPECT_EQ(a.m, 300u);
  }
}

TEST(RunTrial, FormulaSampleSizes) {
  auto c = small_config(LearnerKind::all_pairs);
  EXPECT_EQ(resolve_m(c), required_samples(3, 0.2, 1.0));
  c.learner = LearnerKind::separable;
  EXPECT_EQ(resolve_k(c), choose_k(1.0, 0.2, 2.0));
  c.k = 4;
  EXPECT_EQ(resolve_m(c), required_samples_separable(3, 4, 0.2, 1.0));
}

TEST(RunTrial, PolytopeReportsIterations) {
  auto c = small_config(LearnerKind::polytope);
  c.n = 2;
  c.test_size = 100;
  const auto r = run_trial(c);
  EXPECT_GE(r.iterations, 1u);
  EXPECT_GT(r.m, 0u);
}

TEST(TrialSeed, DistinctAndStable) {
  EXPECT_EQ(trial_seed(5, 3), trial_seed(5, 3));
  EXPECT_NE(trial_seed(5, 3), trial_seed(5, 4));
  EXPECT_NE(trial_seed(5, 3), trial_seed(6, 3));
}

TEST(Sweep, CsvIsReproducibleWithoutTiming) {
  auto c = small_config(LearnerKind::all_pairs);
  c.test_size = 50;
  std::ostringstream a, b;
  write_sweep_csv(a, sweep(c, {10, 40}, 3), false);
  write_sweep_csv(b, sweep(c, {10, 40}, 3), false);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "m,trials,exact_err_mean,exact_err_std,eps_err_mean,eps_err_std,notfound_rate,seconds");
  EXPECT_THROW(sweep(small_config(LearnerKind::polytope), {10}, 1), std::invalid_argument);
}

TEST(MeanStd, SampleDeviation) {
  const auto [m, s] = detail::mean_std({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(s, 1.0);
}

}  // namespace
}  // namespace revpref
