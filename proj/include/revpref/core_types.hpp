#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace revpref {

// Errors

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Inconsistent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyChord : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seeded random source. Every call site owns one; nothing is global.
using Rng = std::mt19937_64;

/// Derives an independent stream from (seed, stream id).
inline Rng fork_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

/// Per-unit prices of n goods, all strictly positive.
class PriceVector {
 public:
  PriceVector() = default;
  explicit PriceVector(std::vector<double> prices) : prices_(std::move(prices)) {
    if (prices_.empty()) throw std::invalid_argument("PriceVector: need at least one good");
    for (double p : prices_) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("PriceVector: prices must be finite and strictly positive");
      }
    }
  }
  PriceVector(std::initializer_list<double> prices) : PriceVector(std::vector<double>(prices)) {}

  std::size_t size() const noexcept { return prices_.size(); }
  double operator[](std::size_t i) const { return prices_[i]; }
  std::span<const double> values() const noexcept { return prices_; }
  double total() const noexcept { return std::accumulate(prices_.begin(), prices_.end(), 0.0); }

  friend bool operator==(const PriceVector&, const PriceVector&) = default;

 private:
  std::vector<double> prices_;
};

/// A price vector paired with a budget.
struct Example {
  PriceVector prices;
  double budget = 0.0;

  Example() = default;
  Example(PriceVector p, double b) : prices(std::move(p)), budget(b) {
    if (!(budget >= 0.0) || !std::isfinite(budget)) {
      throw std::invalid_argument("Example: budget must be finite and nonnegative");
    }
  }

  friend bool operator==(const Example&, const Example&) = default;
};

/// Fractions of each good, each in [0,1].
class Bundle {
 public:
  Bundle() = default;
  explicit Bundle(std::size_t n) : x_(n, 0.0) {}
  explicit Bundle(std::vector<double> quantities) : x_(std::move(quantities)) {
    for (double q : x_) {
      if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("Bundle: quantities must lie in [0,1]");
    }
  }
  Bundle(std::initializer_list<double> q) : Bundle(std::vector<double>(q)) {}

  std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  std::span<const double> values() const noexcept { return x_; }

  /// Sets one coordinate, clamped to [0,1].
  void set(std::size_t i, double q) { x_[i] = std::clamp(q, 0.0, 1.0); }

  double cost(const PriceVector& p) const {
    require_same_size(x_.size(), p.size(), "Bundle::cost");
    double c = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) c += x_[i] * p[i];
    return c;
  }

  friend bool operator==(const Bundle&, const Bundle&) = default;

 private:
  std::vector<double> x_;
};

inline constexpr double kBudgetTolerance = 1e-9;

/// An example together with the bundle the agent bought.
struct Observation {
  Example example;
  Bundle bundle;

  Observation() = default;
  Observation(Example ex, Bundle x) : example(std::move(ex)), bundle(std::move(x)) {
    require_same_size(bundle.size(), example.prices.size(), "Observation");
    if (bundle.cost(example.prices) > example.budget + kBudgetTolerance) {
      throw std::invalid_argument("Observation: bundle exceeds budget");
    }
  }

  std::size_t goods() const noexcept { return bundle.size(); }
};

/// Utility per full unit of each good: v(x) = v . x
class LinearValuation {
 public:
  LinearValuation() = default;
  explicit LinearValuation(std::vector<double> values, bool normalized = false)
      : v_(std::move(values)), normalized_(normalized) {
    if (v_.empty()) throw std::invalid_argument("LinearValuation: need at least one good");
    for (double x : v_) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("LinearValuation: values must be finite and nonnegative");
      }
      if (normalized_ && x > 1.0) {
        throw std::invalid_argument("LinearValuation: normalized values must be <= 1");
      }
    }
  }
  LinearValuation(std::initializer_list<double> v) : LinearValuation(std::vector<double>(v)) {}

  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const noexcept { return v_; }
  bool normalized() const noexcept { return normalized_; }

 private:
  std::vector<double> v_;
  bool normalized_ = false;
};

/// One good's quadratic utility v(x) = a x - (b/2) x^2 on [0,1], with a >= b >= 0.
struct QuadraticUtility {
  double a = 0.0;
  double b = 0.0;

  double value(double x) const noexcept { return a * x - 0.5 * b * x * x; }
  double derivative(double x) const noexcept { return a - b * x; }
};

/// Sum of per-good concave quadratics.
class SeparableConcaveValuation {
 public:
  SeparableConcaveValuation() = default;
  explicit SeparableConcaveValuation(std::vector<QuadraticUtility> goods) : goods_(std::move(goods)) {
    if (goods_.empty()) throw std::invalid_argument("SeparableConcaveValuation: need at least one good");
    for (const auto& g : goods_) {
      if (!(g.b >= 0.0) || !(g.a >= g.b) || !std::isfinite(g.a)) {
        throw std::invalid_argument("SeparableConcaveValuation: require a_i >= b_i >= 0");
      }
    }
  }

  std::size_t size() const noexcept { return goods_.size(); }
  const QuadraticUtility& operator[](std::size_t i) const { return goods_[i]; }
  std::span<const QuadraticUtility> goods() const noexcept { return goods_; }

  /// Largest second-derivative magnitude.
  double curvature_bound() const noexcept {
    double q = 0.0;
    for (const auto& g : goods_) q = std::max(q, g.b);
    return q;
  }

  /// Value of the full bundle (1,...,1).
  double full_value() const noexcept {
    double s = 0.0;
    for (const auto& g : goods_) s += g.value(1.0);
    return s;
  }

  /// Same valuation scaled so the full bundle is worth at most 1.
  SeparableConcaveValuation normalized() const {
    const double total = full_value();
    if (total <= 1.0) return *this;
    std::vector<QuadraticUtility> scaled(goods_.begin(), goods_.end());
    for (auto& g : scaled) {
      g.a /= total;
      g.b /= total;
      g.b = std::min(g.b, g.a);
    }
    return SeparableConcaveValuation(std::move(scaled));
  }

 private:
  std::vector<QuadraticUtility> goods_;
};

/// Coordinatewise-uniform law over examples.
struct ExampleDistribution {
  std::size_t n = 1;
  double p_min = 1.0;
  double p_max = 1.0;
  double budget_min = 0.0;
  double budget_max = 1.0;

  void validate() const {
    if (n < 1) throw std::invalid_argument("ExampleDistribution: n must be >= 1");
    if (!(p_min > 0.0) || !(p_max >= p_min)) {
      throw std::invalid_argument("ExampleDistribution: require 0 < p_min <= p_max");
    }
    if (!(budget_min >= 0.0) || !(budget_max >= budget_min)) {
      throw std::invalid_argument("ExampleDistribution: require 0 <= B_min <= B_max");
    }
  }

  /// Largest ratio of two prices in the support.
  double price_ratio() const noexcept { return p_max / p_min; }
  /// Largest budget-to-price ratio in the support.
  double max_budget_per_price() const noexcept { return budget_max / p_min; }
};

inline Example sample_example(const ExampleDistribution& dist, Rng& rng) {
  dist.validate();
  std::vector<double> prices(dist.n);
  for (auto& p : prices) {
    p = dist.p_min == dist.p_max ? dist.p_min
                                 : std::uniform_real_distribution<double>(dist.p_min, dist.p_max)(rng);
  }
  const double budget =
      dist.budget_min == dist.budget_max
          ? dist.budget_min
          : std::uniform_real_distribution<double>(dist.budget_min, dist.budget_max)(rng);
  return Example(PriceVector(std::move(prices)), budget);
}

inline double bundle_value(const LinearValuation& v, const Bundle& x) {
  require_same_size(v.size(), x.size(), "bundle_value");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += v[i] * x[i];
  return s;
}

inline double bundle_value(const SeparableConcaveValuation& v, const Bundle& x) {
  require_same_size(v.size(), x.size(), "bundle_value");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += v[i].value(x[i]);
  return s;
}

}  // namespace revpref
