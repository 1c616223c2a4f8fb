#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "revpref/core_types.hpp"

namespace revpref {

namespace detail {

inline void check_budget(double budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw std::invalid_argument("budget must be finite and nonnegative");
  }
}

// Goods ordered by value-per-price, highest first; equal ratios keep index order.
inline std::vector<std::size_t> ratio_order(std::span<const double> values, const PriceVector& p) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] / p[a] > values[b] / p[b];
  });
  return order;
}

}  // namespace detail

/// Fractional knapsack: buys goods in decreasing v_i/p_i order until the
/// budget runs out. At most one good is fractional. Zero-valued goods sit at
/// the end of the order and absorb leftover budget, so the whole budget is
/// spent unless every good fits.
inline Bundle solve_linear(const LinearValuation& v, const PriceVector& p, double budget) {
  require_same_size(v.size(), p.size(), "solve_linear");
  detail::check_budget(budget);
  Bundle x(v.size());
  double remaining = budget;
  for (std::size_t i : detail::ratio_order(v.values(), p)) {
    if (remaining <= 0.0) break;
    if (p[i] <= remaining) {
      x.set(i, 1.0);
      remaining -= p[i];
    } else {
      x.set(i, remaining / p[i]);
      remaining = 0.0;
    }
  }
  return x;
}

/// Water-filling optimum for a separable quadratic valuation.
///
/// For a threshold tau every good is filled up to the largest fraction whose
/// marginal value per unit price is still >= tau. Total spend is
/// non-increasing in tau; we bisect for the binding threshold
/// tau* = inf{tau >= 0 : spend(tau) <= B} and take the affordable side.
/// Goods with a flat derivative (b = 0) jump from 0 to 1 at their ratio, so
/// spend(tau*) may fall short of B; the shortfall goes to flat goods sitting
/// at tau* in equal spend shares, each capped at quantity 1.
inline Bundle solve_separable(const SeparableConcaveValuation& v, const PriceVector& p, double budget) {
  require_same_size(v.size(), p.size(), "solve_separable");
  detail::check_budget(budget);
  const std::size_t n = v.size();

  auto fill_at = [&](double tau, std::vector<double>& x) {
    double spend = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = v[i];
      double f = 0.0;
      if (g.a / p[i] >= tau) {
        f = g.b == 0.0 ? 1.0 : std::clamp((g.a - tau * p[i]) / g.b, 0.0, 1.0);
      }
      x[i] = f;
      spend += p[i] * f;
    }
    return spend;
  };

  std::vector<double> x(n, 0.0);
  if (fill_at(0.0, x) <= budget) return Bundle(std::move(x));

  double max_ratio = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_ratio = std::max(max_ratio, v[i].a / p[i]);
  double lo = 0.0;                      // spend(lo) > B
  double hi = 2.0 * max_ratio + 1.0;   // spend(hi) == 0 <= B
  for (int iter = 0; iter < 200 && hi - lo > 1e-16 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (fill_at(mid, x) <= budget) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  double spent = fill_at(hi, x);
  double residual = budget - spent;

  // Residual spend: first flat goods at the threshold, then (only to absorb
  // bisection round-off) sloped goods whose marginal rate is at the threshold.
  auto at_threshold = [&](std::size_t i, bool flat) {
    const auto& g = v[i];
    if (x[i] >= 1.0) return false;
    if ((g.b == 0.0) != flat) return false;
    const double rate = g.derivative(x[i]) / p[i];
    return rate >= lo * (1.0 - 1e-12) - 1e-15;
  };
  for (bool flat : {true, false}) {
    for (int round = 0; round < static_cast<int>(n) + 1 && residual > 0.0; ++round) {
      std::vector<std::size_t> eligible;
      for (std::size_t i = 0; i < n; ++i) {
        if (at_threshold(i, flat)) eligible.push_back(i);
      }
      if (eligible.empty()) break;
      const double share = residual / static_cast<double>(eligible.size());
      for (std::size_t i : eligible) {
        const double add = std::min(share / p[i], 1.0 - x[i]);
        x[i] += add;
        residual -= add * p[i];
      }
      if (residual <= 1e-15 * std::max(1.0, budget)) residual = 0.0;
    }
  }
  for (auto& q : x) q = std::clamp(q, 0.0, 1.0);
  return Bundle(std::move(x));
}

inline Observation make_observation(const LinearValuation& v, const Example& ex) {
  return Observation(ex, solve_linear(v, ex.prices, ex.budget));
}

inline Observation make_observation(const SeparableConcaveValuation& v, const Example& ex) {
  return Observation(ex, solve_separable(v, ex.prices, ex.budget));
}

/// Ordered pair (i, j) meaning "good i beats good j per unit price by a margin".
struct PreferencePair {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

/// Agent's answer to a proposed bundle: accept, or reject with every pair
/// (i, j) satisfying (v_i - m)/p_i > (v_j + m)/p_j for margin m.
struct Feedback {
  bool accepted = true;
  std::vector<PreferencePair> pairs;
};

/// Witness margin epsilon / (2 n M).
inline double feedback_margin(double epsilon, std::size_t n, double price_ratio) {
  return epsilon / (2.0 * static_cast<double>(n) * price_ratio);
}

inline Feedback feedback(const LinearValuation& v, const PriceVector& p, double budget,
                         const Bundle& proposed, double epsilon, double price_ratio) {
  require_same_size(v.size(), p.size(), "feedback");
  require_same_size(proposed.size(), p.size(), "feedback");
  detail::check_budget(budget);
  if (!(epsilon > 0.0)) throw std::invalid_argument("feedback: epsilon must be positive");
  if (!(price_ratio >= 1.0)) throw std::invalid_argument("feedback: M must be >= 1");
  if (proposed.cost(p) > budget + kBudgetTolerance) {
    throw std::invalid_argument("feedback: proposed bundle exceeds the budget");
  }

  const double optimum = bundle_value(v, solve_linear(v, p, budget));
  if (bundle_value(v, proposed) >= optimum - epsilon) return Feedback{};

  const std::size_t n = v.size();
  const double margin = feedback_margin(epsilon, n, price_ratio);
  Feedback out;
  out.accepted = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (v[i] - margin) / p[i] > (v[j] + margin) / p[j]) out.pairs.push_back({i, j});
    }
  }
  return out;
}

/// Callable agent answering proposals for a fixed linear valuation.
class LinearAgent {
 public:
  LinearAgent(LinearValuation v, double epsilon, double price_ratio)
      : v_(std::move(v)), epsilon_(epsilon), price_ratio_(price_ratio) {}

  Feedback operator()(const PriceVector& p, double budget, const Bundle& proposed) const {
    return feedback(v_, p, budget, proposed, epsilon_, price_ratio_);
  }

  const LinearValuation& valuation() const noexcept { return v_; }
  double epsilon() const noexcept { return epsilon_; }
  double price_ratio() const noexcept { return price_ratio_; }

 private:
  LinearValuation v_;
  double epsilon_;
  double price_ratio_;
};

}  // namespace revpref
