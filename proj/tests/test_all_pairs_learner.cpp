#include <gtest/gtest.h>

#include "revpref/all_pairs_learner.hpp"

namespace revpref {
namespace {

Observation obs(std::vector<double> p, double budget, std::vector<double> x) {
  return Observation(Example(PriceVector(std::move(p)), budget), Bundle(std::move(x)));
}

TEST(RequiredSamples, Formula) {
  EXPECT_EQ(required_samples(5, 0.1, 1.0), 1381u);
  EXPECT_EQ(required_samples(1, 0.5, 1.0), 2u);  // ceil(ln 2 / 0.5)
  EXPECT_THROW(required_samples(3, 0.0), std::invalid_argument);
  EXPECT_THROW(required_samples(3, 1.0), std::invalid_argument);
  EXPECT_THROW(required_samples(3, 0.1, 0.0), std::invalid_argument);
}

TEST(AllPairsLearner, SingleObservationBounds) {
  AllPairsLearner model(2);
  model.observe(obs({1.0, 2.0}, 1.0, {1.0, 0.0}));
  EXPECT_EQ(model.bounds().lower(0, 1), 0.5);
  EXPECT_EQ(model.bounds().upper(1, 0), 2.0);
}

TEST(AllPairsLearner, EqualQuantitiesTeachNothing) {
  AllPairsLearner model(3);
  model.observe(obs({1.0, 1.0, 1.0}, 3.0, {1.0, 1.0, 1.0}));
  model.observe(obs({1.0, 1.0, 1.0}, 0.0, {0.0, 0.0, 0.0}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) {
        EXPECT_EQ(model.bounds().lower(i, j), 0.0);
        EXPECT_EQ(model.bounds().upper(i, j), RatioBoundMatrix::kInf);
      }
    }
  }
}

TEST(AllPairsLearner, RecoversOrderingFromSample) {
  const LinearValuation v({0.9, 0.3, 0.6}, true);
  const ExampleDistribution dist{3, 1.0, 2.0, 0.0, 2.0};
  Rng rng(21);
  std::vector<Observation> sample;
  for (int s = 0; s < 500; ++s) sample.push_back(make_observation(v, sample_example(dist, rng)));
  const auto model = AllPairsLearner::train(sample, 3);
  const auto h = model.hypothesis();
  EXPECT_GT(h[0], h[2]);
  EXPECT_GT(h[2], h[1]);
  EXPECT_EQ(*std::max_element(h.begin(), h.end()), 1.0);
}

TEST(AllPairsLearner, PredictErrors) {
  AllPairsLearner model(2);
  model.finalize();
  EXPECT_THROW(model.predict(PriceVector{1.0, 1.0, 1.0}, 1.0), DimensionMismatch);
  EXPECT_THROW(model.observe(obs({1.0}, 1.0, {1.0})), DimensionMismatch);
  EXPECT_THROW(AllPairsLearner(0), std::invalid_argument);
}

// Truth always satisfies learned bounds; whenever the bounds decide the order
// of every pair at a test price, the prediction equals the agent's bundle.
TEST(AllPairsLearner, SoundAndExactWhenDecided) {
  Rng rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + t % 4;
    std::vector<double> vals(n);
    for (auto& x : vals) x = u(rng);
    const LinearValuation v(vals);
    const ExampleDistribution dist{n, 1.0, 2.0, 0.0, 2.0};
    AllPairsLearner model(n);
    for (int s = 0; s < 200; ++s) {
      model.observe(make_observation(v, sample_example(dist, rng)));
      if (s % 20 == 0) {
        ASSERT_TRUE(model.bounds().satisfied_by(vals));
      }
    }
    model.finalize();
    for (int q = 0; q < 100; ++q) {
      const Example ex = sample_example(dist, rng);
      bool decided = true;
      for (std::size_t i = 0; i < n && decided; ++i) {
        for (std::size_t j = i + 1; j < n && decided; ++j) {
          // Equal ratios are decided only if both directions are implied.
          const double r = ex.prices[i] / ex.prices[j];
          const bool ge = model.bounds().implies_geq(i, j, r);
          const bool le = model.bounds().implies_geq(j, i, 1.0 / r);
          decided = ge != le;
        }
      }
      if (!decided) continue;
      const Bundle got = model.predict(ex.prices, ex.budget);
      const Bundle want = solve_linear(v, ex.prices, ex.budget);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
    }
  }
}

}  // namespace
}  // namespace revpref
