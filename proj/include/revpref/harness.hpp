#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "revpref/agent_oracle.hpp"
#include "revpref/all_pairs_learner.hpp"
#include "revpref/core_types.hpp"
#include "revpref/polytope_learner.hpp"
#include "revpref/separable_learner.hpp"

namespace revpref {

enum class LearnerKind { all_pairs, separable, polytope };

inline const char* to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::all_pairs: return "all_pairs";
    case LearnerKind::separable: return "separable";
    case LearnerKind::polytope: return "polytope";
  }
  return "?";
}

inline LearnerKind parse_learner(const std::string& s) {
  if (s == "all_pairs") return LearnerKind::all_pairs;
  if (s == "separable") return LearnerKind::separable;
  if (s == "polytope") return LearnerKind::polytope;
  throw std::invalid_argument("unknown learner '" + s + "'");
}

struct TrialConfig {
  LearnerKind learner = LearnerKind::all_pairs;
  std::size_t n = 2;
  double delta = 0.1;
  double epsilon = 0.1;
  double c = 1.0;
  std::optional<int> k;              // empty -> choose_k
  double curvature = 1.0;            // Q for generated separable instances
  double p_min = 1.0;
  double p_max = 2.0;
  double budget_min = 0.0;
  double budget_max = 2.0;
  std::optional<std::uint64_t> m;    // empty -> sample-size formula
  std::size_t test_size = 1000;
  std::uint64_t seed = 0;

  ExampleDistribution distribution() const { return {n, p_min, p_max, budget_min, budget_max}; }

  void validate() const {
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    check_delta(delta);
    if (learner == LearnerKind::polytope && delta > 0.5) {
      throw std::invalid_argument("config: polytope learner needs delta <= 1/2");
    }
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("config: C must be positive");
    if (k && *k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (!(curvature >= 0.0)) throw std::invalid_argument("config: Q must be nonnegative");
    if (test_size < 1) throw std::invalid_argument("config: test_size must be >= 1");
    distribution().validate();
  }
};

struct TrialResult {
  std::uint64_t m = 0;
  double exact_error = 0.0;
  double epsilon_error = 0.0;
  double notfound_rate = 0.0;
  std::size_t iterations = 0;
  std::size_t constraints = 0;
  bool cap_reached = false;
  int k = 0;
  double seconds = 0.0;
};

using Valuation = std::variant<LinearValuation, SeparableConcaveValuation>;

struct Instance {
  Valuation truth;
  ExampleDistribution dist;
};

inline double optimal_value(const Valuation& v, const PriceVector& p, double budget) {
  return std::visit(
      [&](const auto& val) -> double {
        using T = std::decay_t<decltype(val)>;
        if constexpr (std::is_same_v<T, LinearValuation>) {
          return bundle_value(val, solve_linear(val, p, budget));
        } else {
          return bundle_value(val, solve_separable(val, p, budget));
        }
      },
      v);
}

inline double true_value(const Valuation& v, const Bundle& x) {
  return std::visit([&](const auto& val) { return bundle_value(val, x); }, v);
}

inline Observation observe(const Valuation& v, const Example& ex) {
  return std::visit([&](const auto& val) { return make_observation(val, ex); }, v);
}

/// Linear truths are uniform in [0,1]^n. Separable truths draw b_i ~ U[0,Q]
/// and a_i ~ U[b_i, max(1, b_i)], then scale so the full bundle is worth <= 1.
inline Instance generate_instance(const TrialConfig& config, Rng& rng) {
  config.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (config.learner == LearnerKind::separable) {
    std::vector<QuadraticUtility> goods(config.n);
    for (auto& g : goods) {
      g.b = config.curvature * unit(rng);
      const double top = std::max(1.0, g.b);
      g.a = g.b + (top - g.b) * unit(rng);
    }
    return {SeparableConcaveValuation(std::move(goods)).normalized(), config.distribution()};
  }
  std::vector<double> v(config.n);
  for (auto& x : v) x = unit(rng);
  return {LinearValuation(std::move(v), true), config.distribution()};
}

inline bool values_match(double predicted, double optimal) {
  const double scale = std::max(std::abs(predicted), std::abs(optimal));
  return std::abs(predicted - optimal) <= 1e-9 * scale + 1e-15;
}

struct EvaluationStats {
  double exact_error = 0.0;
  double epsilon_error = 0.0;
};

/// Error rates of `predictor(const Example&, Rng&) -> Bundle` on fresh examples:
/// exact counts any value shortfall (relative 1e-9), epsilon counts shortfalls beyond epsilon.
template <class Predictor>
EvaluationStats evaluate(Predictor&& predictor, const Valuation& truth, const ExampleDistribution& dist,
                         std::size_t test_size, double epsilon, Rng& rng) {
  if (test_size < 1) throw std::invalid_argument("evaluate: test_size must be >= 1");
  std::size_t exact_miss = 0;
  std::size_t eps_miss = 0;
  for (std::size_t t = 0; t < test_size; ++t) {
    const Example ex = sample_example(dist, rng);
    const Bundle x = predictor(ex, rng);
    const double got = true_value(truth, x);
    const double best = optimal_value(truth, ex.prices, ex.budget);
    if (!values_match(got, best)) ++exact_miss;
    if (got < best - epsilon) ++eps_miss;
  }
  const double denom = static_cast<double>(test_size);
  return {exact_miss / denom, eps_miss / denom};
}

/// Trained hypothesis of any of the three learners.
using TrainedModel = std::variant<AllPairsLearner, DerivativeGrid, Polytope>;

struct TrainingOutcome {
  TrainedModel model;
  std::uint64_t m = 0;
  int k = 0;
  std::size_t iterations = 0;
  bool cap_reached = false;
  std::vector<IterationRecord> log;
};

inline int resolve_k(const TrialConfig& config) {
  return config.k ? *config.k
                  : choose_k(config.curvature, config.epsilon, config.distribution().max_budget_per_price());
}

inline std::uint64_t resolve_m(const TrialConfig& config) {
  if (config.m) return *config.m;
  switch (config.learner) {
    case LearnerKind::all_pairs: return required_samples(config.n, config.delta, config.c);
    case LearnerKind::separable:
      return required_samples_separable(config.n, resolve_k(config), config.delta, config.c);
    case LearnerKind::polytope: return 0;
  }
  return 0;
}

// Stream ids for fork_rng.
inline constexpr std::uint64_t kInstanceStream = 0;
inline constexpr std::uint64_t kTrainStream = 1;
inline constexpr std::uint64_t kTestStream = 2;
inline constexpr std::uint64_t kLearnerStream = 3;

inline TrainingOutcome train_model(const TrialConfig& config, const Instance& instance) {
  Rng train_rng = fork_rng(config.seed, kTrainStream);
  TrainingOutcome out{Polytope(config.n), 0, 0, 0, false, {}};
  switch (config.learner) {
    case LearnerKind::all_pairs:
    case LearnerKind::separable: {
      out.m = resolve_m(config);
      if (config.learner == LearnerKind::all_pairs) {
        AllPairsLearner model(config.n);
        for (std::uint64_t s = 0; s < out.m; ++s) model.observe(observe(instance.truth, sample_example(instance.dist, train_rng)));
        model.finalize();
        out.model = std::move(model);
      } else {
        out.k = resolve_k(config);
        DerivativeGrid grid(config.n, out.k);
        for (std::uint64_t s = 0; s < out.m; ++s) grid.observe(observe(instance.truth, sample_example(instance.dist, train_rng)));
        grid.finalize();
        out.model = std::move(grid);
      }
      break;
    }
    case LearnerKind::polytope: {
      const auto& v = std::get<LinearValuation>(instance.truth);
      LinearAgent agent(v, config.epsilon, instance.dist.price_ratio());
      PolytopeTrainingOptions opts;
      opts.c = config.c;
      auto trained = train_polytope(agent, instance.dist, config.epsilon, config.delta, train_rng, opts);
      out.m = trained.examples_consumed;
      out.iterations = trained.log.size();
      out.cap_reached = trained.cap_reached;
      out.log = std::move(trained.log);
      out.model = std::move(trained.body);
      break;
    }
  }
  return out;
}

/// Prediction from any trained model. `fallback` reports a separable NotFound.
inline Bundle predict_with(const TrainedModel& model, const Example& ex, Rng& rng, bool* fallback = nullptr) {
  if (fallback) *fallback = false;
  return std::visit(
      [&](const auto& m) -> Bundle {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AllPairsLearner>) {
          return m.predict(ex.prices, ex.budget);
        } else if constexpr (std::is_same_v<T, DerivativeGrid>) {
          auto pred = predict_detailed(m, ex.prices, ex.budget, rng);
          if (fallback) *fallback = !pred.found();
          return std::move(pred.bundle);
        } else {
          return predict_polytope(m, ex.prices, ex.budget, rng);
        }
      },
      model);
}

inline TrialResult run_trial(const TrialConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  Rng instance_rng = fork_rng(config.seed, kInstanceStream);
  const Instance instance = generate_instance(config, instance_rng);
  TrainingOutcome trained = train_model(config, instance);

  Rng test_rng = fork_rng(config.seed, kTestStream);
  Rng learner_rng = fork_rng(config.seed, kLearnerStream);
  std::size_t notfound = 0;
  auto predictor = [&](const Example& ex, Rng&) {
    bool fell_back = false;
    Bundle x = predict_with(trained.model, ex, learner_rng, &fell_back);
    if (fell_back) ++notfound;
    return x;
  };
  const auto stats = evaluate(predictor, instance.truth, instance.dist, config.test_size, config.epsilon, test_rng);

  TrialResult r;
  r.m = trained.m;
  r.k = trained.k;
  r.exact_error = stats.exact_error;
  r.epsilon_error = stats.epsilon_error;
  r.notfound_rate = static_cast<double>(notfound) / static_cast<double>(config.test_size);
  r.iterations = trained.iterations;
  r.cap_reached = trained.cap_reached;
  if (const auto* body = std::get_if<Polytope>(&trained.model)) r.constraints = body->halfspaces().size();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Seed of trial t in a sweep; shared across m values so each m sees the same instances.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(trial), 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct SweepRow {
  std::uint64_t m = 0;
  std::size_t trials = 0;
  double exact_err_mean = 0.0;
  double exact_err_std = 0.0;
  double eps_err_mean = 0.0;
  double eps_err_std = 0.0;
  double notfound_rate = 0.0;
  double seconds = 0.0;
};

namespace detail {
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}
}  // namespace detail

/// Runs `trials` trials at each training-set size.
inline std::vector<SweepRow> sweep(const TrialConfig& config, const std::vector<std::uint64_t>& m_values,
                                   std::size_t trials) {
  if (config.learner == LearnerKind::polytope) {
    throw std::invalid_argument("sweep: the polytope learner chooses its own sample size");
  }
  if (trials < 1) throw std::invalid_argument("sweep: need at least one trial");
  std::vector<SweepRow> rows;
  for (std::uint64_t m : m_values) {
    std::vector<double> exact;
    std::vector<double> eps;
    double notfound = 0.0;
    double seconds = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      TrialConfig c = config;
      c.m = m;
      c.seed = trial_seed(config.seed, t);
      const TrialResult r = run_trial(c);
      exact.push_back(r.exact_error);
      eps.push_back(r.epsilon_error);
      notfound += r.notfound_rate;
      seconds += r.seconds;
    }
    SweepRow row;
    row.m = m;
    row.trials = trials;
    std::tie(row.exact_err_mean, row.exact_err_std) = detail::mean_std(exact);
    std::tie(row.eps_err_mean, row.eps_err_std) = detail::mean_std(eps);
    row.notfound_rate = notfound / static_cast<double>(trials);
    row.seconds = seconds;
    rows.push_back(row);
  }
  return rows;
}

/// Writes the sweep table. With include_timing false the seconds column is 0
/// so identical runs produce identical bytes.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool include_timing = true) {
  os << "m,trials,exact_err_mean,exact_err_std,eps_err_mean,eps_err_std,notfound_rate,seconds\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.m << ',' << r.trials << ',' << r.exact_err_mean << ',' << r.exact_err_std << ',' << r.eps_err_mean << ','
       << r.eps_err_std << ',' << r.notfound_rate << ',' << (include_timing ? r.seconds : 0.0) << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace revpref
