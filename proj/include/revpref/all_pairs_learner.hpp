#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "revpref/agent_oracle.hpp"
#include "revpref/core_types.hpp"
#include "revpref/ratio_bounds.hpp"

namespace revpref {

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

/// ceil(C * N^2 ln(N^2 / delta) / delta) for N compared entities.
inline std::uint64_t pairwise_sample_count(double entities, double delta, double c) {
  check_delta(delta);
  if (!(c > 0.0)) throw std::invalid_argument("sample constant C must be positive");
  const double sq = entities * entities;
  return static_cast<std::uint64_t>(std::ceil(c * sq * std::log(sq / delta) / delta));
}

/// Training-set size for the pairwise linear learner.
inline std::uint64_t required_samples(std::size_t n, double delta, double c = 1.0) {
  if (n < 1) throw std::invalid_argument("required_samples: n must be >= 1");
  return pairwise_sample_count(static_cast<double>(n), delta, c);
}

/// Learns bounds on every value ratio v_i / v_j of a linear agent.
///
/// Each observation with x_i > x_j certifies v_i/p_i >= v_j/p_j, i.e.
/// v_i / v_j >= p_i / p_j. Predictions solve the knapsack for any vector
/// consistent with the learned bounds.
class AllPairsLearner {
 public:
  explicit AllPairsLearner(std::size_t n) : bounds_(n) {
    if (n < 1) throw std::invalid_argument("AllPairsLearner: n must be >= 1");
  }
  explicit AllPairsLearner(RatioBoundMatrix bounds) : bounds_(std::move(bounds)) {}

  static AllPairsLearner train(std::span<const Observation> observations, std::size_t n) {
    AllPairsLearner model(n);
    for (const auto& obs : observations) model.observe(obs);
    model.finalize();
    return model;
  }

  void observe(const Observation& obs) {
    require_same_size(obs.goods(), goods(), "AllPairsLearner::observe");
    const auto& x = obs.bundle;
    const auto& p = obs.example.prices;
    for (std::size_t i = 0; i < goods(); ++i) {
      for (std::size_t j = 0; j < goods(); ++j) {
        if (i == j) continue;
        if (x[i] > x[j]) bounds_.tighten_lower(i, j, p[i] / p[j]);
        if (x[j] > x[i]) bounds_.tighten_upper(i, j, p[i] / p[j]);
      }
    }
    hypothesis_.clear();
  }

  /// Closes the bounds and fixes the hypothesis; afterwards predict() is read-only.
  void finalize() {
    bounds_.finalize();
    hypothesis_ = bounds_.consistent_vector();
  }

  /// Max-normalized value vector consistent with the bounds.
  std::vector<double> hypothesis() const {
    return hypothesis_.empty() ? bounds_.consistent_vector() : hypothesis_;
  }

  Bundle predict(const PriceVector& p, double budget) const {
    require_same_size(p.size(), goods(), "AllPairsLearner::predict");
    return solve_linear(LinearValuation(hypothesis()), p, budget);
  }

  /// Whether the bounds alone decide the order of goods i and j at prices p.
  bool preference_implied(std::size_t i, std::size_t j, const PriceVector& p) const {
    return bounds_.implies_geq(i, j, p[i] / p[j]) || bounds_.implies_geq(j, i, p[j] / p[i]);
  }

  std::size_t goods() const noexcept { return bounds_.size(); }
  const RatioBoundMatrix& bounds() const noexcept { return bounds_; }

 private:
  RatioBoundMatrix bounds_;
  std::vector<double> hypothesis_;
};

}  // namespace revpref
