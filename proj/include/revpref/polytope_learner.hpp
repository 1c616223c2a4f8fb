#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "revpref/agent_oracle.hpp"
#include "revpref/core_types.hpp"
#include "revpref/ratio_bounds.hpp"

namespace revpref {

enum class HalfspaceKind { box, feedback, general };

/// Constraint a . v >= offset.
///
/// Feedback cuts have exactly two non-zero coefficients, p_j at i and -p_i
/// at j, encoding v_i / p_i >= v_j / p_j.
struct Halfspace {
  std::vector<double> coefficients;
  double offset = 0.0;
  HalfspaceKind kind = HalfspaceKind::general;
  std::size_t i = 0;
  std::size_t j = 0;
  double price_i = 0.0;
  double price_j = 0.0;

  static Halfspace feedback(std::size_t n, std::size_t i, std::size_t j, double price_i, double price_j) {
    if (i >= n || j >= n || i == j) throw std::invalid_argument("Halfspace::feedback: bad good indices");
    if (!(price_i > 0.0) || !(price_j > 0.0)) throw std::invalid_argument("Halfspace::feedback: prices must be positive");
    Halfspace h;
    h.coefficients.assign(n, 0.0);
    h.coefficients[i] = price_j;
    h.coefficients[j] = -price_i;
    h.kind = HalfspaceKind::feedback;
    h.i = i;
    h.j = j;
    h.price_i = price_i;
    h.price_j = price_j;
    return h;
  }

  static Halfspace general(std::vector<double> a, double offset = 0.0) {
    if (std::all_of(a.begin(), a.end(), [](double c) { return c == 0.0; })) {
      throw std::invalid_argument("Halfspace: coefficients must not all be zero");
    }
    Halfspace h;
    h.coefficients = std::move(a);
    h.offset = offset;
    return h;
  }

  double slack(std::span<const double> v) const {
    double s = -offset;
    for (std::size_t k = 0; k < v.size(); ++k) s += coefficients[k] * v[k];
    return s;
  }

  double norm() const {
    double s = 0.0;
    for (double c : coefficients) s += c * c;
    return std::sqrt(s);
  }

  bool contains(std::span<const double> v, double tol = 1e-12) const { return slack(v) >= -tol * norm(); }

  /// v_i / p_i ratio encoded by a feedback cut: v_i >= ratio() * v_j.
  double ratio() const { return price_i / price_j; }
};

/// Unit box [0,1]^n intersected with halfspaces, plus a known interior point.
class Polytope {
 public:
  static constexpr double kMembershipTol = 1e-12;

  Polytope() = default;
  explicit Polytope(std::size_t n) : n_(n), interior_(n, 0.5) {
    if (n < 1) throw std::invalid_argument("Polytope: dimension must be >= 1");
  }

  std::size_t dimension() const noexcept { return n_; }
  const std::vector<Halfspace>& halfspaces() const noexcept { return halfspaces_; }
  const std::vector<double>& interior_point() const noexcept { return interior_; }

  void set_interior_point(std::vector<double> point) {
    require_same_size(point.size(), n_, "Polytope::set_interior_point");
    interior_ = std::move(point);
  }

  /// Adds a constraint. Returns false when an equal or stronger constraint is
  /// already stored. A feedback cut on (i, j) with a larger ratio replaces a
  /// weaker one on the same pair, since v >= 0 makes the weaker one redundant.
  bool add(const Halfspace& h) {
    require_same_size(h.coefficients.size(), n_, "Polytope::add");
    if (h.kind == HalfspaceKind::box) return false;
    for (auto& existing : halfspaces_) {
      if (h.kind == HalfspaceKind::feedback && existing.kind == HalfspaceKind::feedback && existing.i == h.i &&
          existing.j == h.j) {
        if (h.ratio() <= existing.ratio() * (1.0 + 1e-12)) return false;
        existing = h;
        return true;
      }
      if (same_constraint(existing, h)) return false;
    }
    halfspaces_.push_back(h);
    return true;
  }

  double min_slack(std::span<const double> v) const {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_; ++k) s = std::min({s, v[k], 1.0 - v[k]});
    for (const auto& h : halfspaces_) s = std::min(s, h.slack(v) / h.norm());
    return s;
  }

  bool contains(std::span<const double> v, double tol = kMembershipTol) const {
    require_same_size(v.size(), n_, "Polytope::contains");
    return min_slack(v) >= -tol;
  }

  /// Parameter range [lo, hi] with x + t d inside the body.
  std::pair<double, double> chord(std::span<const double> x, std::span<const double> d) const {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_; ++k) {
      if (d[k] > 0.0) {
        lo = std::max(lo, -x[k] / d[k]);
        hi = std::min(hi, (1.0 - x[k]) / d[k]);
      } else if (d[k] < 0.0) {
        lo = std::max(lo, (1.0 - x[k]) / d[k]);
        hi = std::min(hi, -x[k] / d[k]);
      }
    }
    for (const auto& h : halfspaces_) {
      const double s = h.slack(x);
      double ad = 0.0;
      for (std::size_t k = 0; k < n_; ++k) ad += h.coefficients[k] * d[k];
      if (ad > 0.0) {
        lo = std::max(lo, -s / ad);
      } else if (ad < 0.0) {
        hi = std::min(hi, -s / ad);
      } else if (s < -kMembershipTol * h.norm()) {
        return {1.0, 0.0};
      }
    }
    return {lo, hi};
  }

 private:
  static bool same_constraint(const Halfspace& a, const Halfspace& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (std::abs(a.offset / na - b.offset / nb) > 1e-12) return false;
    for (std::size_t k = 0; k < a.coefficients.size(); ++k) {
      if (std::abs(a.coefficients[k] / na - b.coefficients[k] / nb) > 1e-12) return false;
    }
    return true;
  }

  std::size_t n_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<double> interior_;
};

inline std::size_t default_walk_steps(std::size_t n) { return 50 * n; }

/// Runs `steps` hit-and-run moves from `point` inside K, updating it in place.
inline void walk(const Polytope& body, std::vector<double>& point, std::size_t steps, Rng& rng) {
  const std::size_t n = body.dimension();
  require_same_size(point.size(), n, "walk");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> dir(n);
  for (std::size_t s = 0; s < steps; ++s) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& c : dir) {
        c = gauss(rng);
        norm += c * c;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& c : dir) c /= norm;
    const auto [lo, hi] = body.chord(point, dir);
    if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw EmptyChord("hit-and-run: empty chord; the body has collapsed");
    }
    const double t = lo + unit(rng) * (hi - lo);
    for (std::size_t k = 0; k < n; ++k) point[k] = std::clamp(point[k] + t * dir[k], 0.0, 1.0);
  }
}

/// Approximately uniform point of K; the chain resumes from and updates K's interior point.
inline std::vector<double> hit_and_run(Polytope& body, std::size_t steps, Rng& rng) {
  std::vector<double> point = body.interior_point();
  walk(body, point, steps, rng);
  body.set_interior_point(point);
  return point;
}

/// Hoeffding half-width sqrt(ln(2/gamma) / (2N)).
inline double hoeffding_half_width(std::size_t samples, double gamma) {
  return std::sqrt(std::log(2.0 / gamma) / (2.0 * static_cast<double>(samples)));
}

struct VolumeEstimate {
  double ratio = 1.0;
  /// Sample inside every new constraint with the largest margin, if any.
  std::optional<std::vector<double>> best_inside;
};

inline VolumeEstimate estimate_volume_ratio_detailed(Polytope& body, std::span<const Halfspace> cuts,
                                                     std::size_t samples, Rng& rng, std::size_t steps = 0) {
  if (samples < 1) throw std::invalid_argument("estimate_volume_ratio: need at least one sample");
  VolumeEstimate out;
  if (cuts.empty()) return out;
  if (steps == 0) steps = default_walk_steps(body.dimension());
  std::size_t inside = 0;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const auto v = hit_and_run(body, steps, rng);
    double margin = body.min_slack(v);
    bool ok = true;
    for (const auto& h : cuts) {
      const double sl = h.slack(v) / h.norm();
      margin = std::min(margin, sl);
      if (sl < 0.0) ok = false;
    }
    if (!ok) continue;
    ++inside;
    if (margin > best_margin) {
      best_margin = margin;
      out.best_inside = v;
    }
  }
  out.ratio = static_cast<double>(inside) / static_cast<double>(samples);
  return out;
}

/// Fraction of hit-and-run samples of K that satisfy every new constraint.
inline double estimate_volume_ratio(Polytope& body, std::span<const Halfspace> cuts, std::size_t samples, Rng& rng,
                                    std::size_t steps = 0) {
  return estimate_volume_ratio_detailed(body, cuts, samples, rng, steps).ratio;
}

/// Strictly interior point of a body cut only by feedback constraints.
///
/// Feedback cuts are ratio bounds v_i / v_j >= p_i / p_j, so a point with
/// log-space margin eta on every cut comes from a difference-constraint
/// solve. eta is bisected to the largest feasible value in [0, 1] and halved.
inline std::vector<double> central_point(const Polytope& body) {
  const std::size_t n = body.dimension();
  auto build = [&](double eta) {
    RatioBoundMatrix m(n);
    for (const auto& h : body.halfspaces()) {
      if (h.kind != HalfspaceKind::feedback) {
        throw EmptyChord("central_point: only feedback cuts are supported");
      }
      m.tighten_lower(h.i, h.j, h.ratio() * std::exp(eta));
    }
    return m;
  };
  if (!build(0.0).consistent()) throw EmptyChord("polytope has no interior: cuts are contradictory");
  double lo = 0.0;
  double hi = 1.0;
  if (build(hi).consistent()) {
    lo = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (build(mid).consistent()) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  if (!(lo > 1e-12)) throw EmptyChord("polytope interior is below tolerance");
  auto y = build(0.5 * lo).consistent_vector();
  for (auto& c : y) c *= 0.5;
  return y;
}

/// One row of the training log.
struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t constraints_added = 0;
  double volume_ratio = 1.0;
  std::uint64_t examples_consumed = 0;
  std::size_t rejections = 0;
  std::size_t invalid_cuts = 0;
};

struct PolytopeTrainingOptions {
  double c = 1.0;
  std::size_t walk_steps = 0;       // 0 -> 50 n
  std::size_t volume_samples = 0;   // 0 -> ceil(25 / delta^2)
  double confidence = 0.05;         // Hoeffding gamma for reporting
  /// Called after every batch with the pre-cut body K and the cut body K'.
  std::function<void(const IterationRecord&, const Polytope&, const Polytope&)> observer;
};

struct PolytopeTraining {
  Polytope body;
  Polytope last_cut;
  std::vector<IterationRecord> log;
  std::uint64_t examples_consumed = 0;
  std::size_t batch_size = 0;
  std::size_t iteration_cap = 0;
  std::size_t volume_samples = 0;
  double half_width = 0.0;
  bool cap_reached = false;

  void write_log_csv(std::ostream& os) const {
    os << "iteration,constraints_added,volume_ratio,examples_consumed\n";
    for (const auto& r : log) {
      os << r.iteration << ',' << r.constraints_added << ',' << r.volume_ratio << ',' << r.examples_consumed << '\n';
    }
  }
};

/// ceil(C ln(n + 1) ln(1/delta) / delta^2) examples per batch.
inline std::size_t polytope_batch_size(std::size_t n, double delta, double c) {
  return static_cast<std::size_t>(
      std::ceil(c * std::log(static_cast<double>(n) + 1.0) * std::log(1.0 / delta) / (delta * delta)));
}

/// ceil(n ln(1/eps') / delta) + 1 with eps' = epsilon / (2 n M).
inline std::size_t polytope_iteration_cap(std::size_t n, double epsilon, double delta, double price_ratio) {
  const double margin = feedback_margin(epsilon, n, price_ratio);
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) * std::log(1.0 / margin) / delta)) + 1;
}

/// Interactive cutting-plane training against a feedback oracle
/// `Feedback(const PriceVector&, double budget, const Bundle& proposed)`.
template <class Oracle>
PolytopeTraining train_polytope(const Oracle& oracle, const ExampleDistribution& dist, double epsilon, double delta,
                                Rng& rng, const PolytopeTrainingOptions& options = {}) {
  dist.validate();
  if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("train_polytope: delta must lie in (0, 1/2]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("train_polytope: epsilon must be positive");
  if (!(options.c > 0.0)) throw std::invalid_argument("train_polytope: C must be positive");
  const std::size_t n = dist.n;

  PolytopeTraining out;
  out.batch_size = std::max<std::size_t>(1, polytope_batch_size(n, delta, options.c));
  out.iteration_cap = polytope_iteration_cap(n, epsilon, delta, dist.price_ratio());
  out.volume_samples = options.volume_samples ? options.volume_samples
                                              : static_cast<std::size_t>(std::ceil(25.0 / (delta * delta)));
  out.half_width = hoeffding_half_width(out.volume_samples, options.confidence);
  const std::size_t steps = options.walk_steps ? options.walk_steps : default_walk_steps(n);

  Polytope body(n);
  for (std::size_t it = 1; it <= out.iteration_cap; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    std::vector<Halfspace> cuts;
    Polytope cut_body = body;
    for (std::size_t b = 0; b < out.batch_size; ++b) {
      const Example ex = sample_example(dist, rng);
      const auto guess = hit_and_run(body, steps, rng);
      const Bundle proposal = solve_linear(LinearValuation(guess), ex.prices, ex.budget);
      const Feedback fb = oracle(ex.prices, ex.budget, proposal);
      if (fb.accepted) continue;
      ++rec.rejections;
      bool violated = false;
      for (const auto& pr : fb.pairs) {
        const auto h = Halfspace::feedback(n, pr.i, pr.j, ex.prices[pr.i], ex.prices[pr.j]);
        if (guess[pr.i] / ex.prices[pr.i] <= guess[pr.j] / ex.prices[pr.j]) violated = true;
        if (cut_body.add(h)) cuts.push_back(h);
      }
      if (!violated) ++rec.invalid_cuts;
    }
    out.examples_consumed += out.batch_size;
    rec.examples_consumed = out.examples_consumed;
    rec.constraints_added = cuts.size();

    auto estimate = estimate_volume_ratio_detailed(body, cuts, out.volume_samples, rng, steps);
    rec.volume_ratio = estimate.ratio;
    out.log.push_back(rec);
    if (options.observer) options.observer(rec, body, cut_body);

    if (estimate.ratio > 1.0 - delta) {
      out.body = std::move(body);
      out.last_cut = std::move(cut_body);
      return out;
    }
    // Continue from K'. Keep the chain point if it is still strictly inside,
    // else the best surviving sample, else a central point.
    if (cut_body.min_slack(body.interior_point()) >= 1e-12) {
      cut_body.set_interior_point(body.interior_point());
    } else if (estimate.best_inside && cut_body.min_slack(*estimate.best_inside) >= 1e-12) {
      cut_body.set_interior_point(*estimate.best_inside);
    } else {
      cut_body.set_interior_point(central_point(cut_body));
    }
    body = std::move(cut_body);
  }
  out.cap_reached = true;
  out.last_cut = body;
  out.body = std::move(body);
  return out;
}

/// Samples v from K and buys the knapsack optimum for it. K is not modified.
inline Bundle predict_polytope(const Polytope& body, const PriceVector& p, double budget, Rng& rng,
                               std::size_t steps = 0) {
  require_same_size(p.size(), body.dimension(), "predict_polytope");
  std::vector<double> point = body.interior_point();
  walk(body, point, steps ? steps : default_walk_steps(body.dimension()), rng);
  return solve_linear(LinearValuation(point), p, budget);
}

}  // namespace revpref
