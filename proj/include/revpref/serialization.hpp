#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "revpref/harness.hpp"

namespace revpref {

using json = nlohmann::json;

// Infinite upper bounds are written as null.

inline json bounds_to_json(const RatioBoundMatrix& m) {
  const std::size_t n = m.size();
  json lower = json::array();
  json upper = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json lrow = json::array();
    json urow = json::array();
    for (std::size_t j = 0; j < n; ++j) {
      lrow.push_back(m.lower(i, j));
      const double u = m.upper(i, j);
      urow.push_back(std::isinf(u) ? json(nullptr) : json(u));
    }
    lower.push_back(std::move(lrow));
    upper.push_back(std::move(urow));
  }
  return {{"N", n}, {"L", std::move(lower)}, {"U", std::move(upper)}};
}

inline RatioBoundMatrix bounds_from_json(const json& j) {
  const auto n = j.at("N").get<std::size_t>();
  std::vector<double> lower;
  std::vector<double> upper;
  lower.reserve(n * n);
  upper.reserve(n * n);
  const auto& L = j.at("L");
  const auto& U = j.at("U");
  if (L.size() != n || U.size() != n) throw std::invalid_argument("bounds: expected N rows");
  for (std::size_t i = 0; i < n; ++i) {
    if (L[i].size() != n || U[i].size() != n) throw std::invalid_argument("bounds: expected N columns");
    for (std::size_t k = 0; k < n; ++k) {
      lower.push_back(L[i][k].get<double>());
      upper.push_back(U[i][k].is_null() ? RatioBoundMatrix::kInf : U[i][k].get<double>());
    }
  }
  return RatioBoundMatrix::from_bounds(n, std::move(lower), std::move(upper));
}

inline json halfspace_to_json(const Halfspace& h) {
  json j{{"coefficients", h.coefficients}, {"offset", h.offset}};
  if (h.kind == HalfspaceKind::feedback) {
    j["tag"] = "feedback";
    j["i"] = h.i;
    j["j"] = h.j;
    j["p_i"] = h.price_i;
    j["p_j"] = h.price_j;
  } else {
    j["tag"] = h.kind == HalfspaceKind::box ? "box" : "general";
  }
  return j;
}

inline Halfspace halfspace_from_json(const json& j, std::size_t n) {
  const auto tag = j.value("tag", std::string("general"));
  if (tag == "feedback") {
    return Halfspace::feedback(n, j.at("i").get<std::size_t>(), j.at("j").get<std::size_t>(),
                               j.at("p_i").get<double>(), j.at("p_j").get<double>());
  }
  auto h = Halfspace::general(j.at("coefficients").get<std::vector<double>>(), j.value("offset", 0.0));
  if (tag == "box") h.kind = HalfspaceKind::box;
  return h;
}

inline json polytope_to_json(const Polytope& body) {
  json hs = json::array();
  for (const auto& h : body.halfspaces()) hs.push_back(halfspace_to_json(h));
  return {{"dimension", body.dimension()}, {"halfspaces", std::move(hs)}, {"interior_point", body.interior_point()}};
}

inline Polytope polytope_from_json(const json& j) {
  Polytope body(j.at("dimension").get<std::size_t>());
  for (const auto& h : j.at("halfspaces")) body.add(halfspace_from_json(h, body.dimension()));
  body.set_interior_point(j.at("interior_point").get<std::vector<double>>());
  if (!body.contains(body.interior_point())) throw std::invalid_argument("polytope: interior point is outside the body");
  return body;
}

inline json model_to_json(const TrainedModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AllPairsLearner>) {
          return {{"learner", "all_pairs"}, {"n", m.goods()}, {"bounds", bounds_to_json(m.bounds())}};
        } else if constexpr (std::is_same_v<T, DerivativeGrid>) {
          return {{"learner", "separable"}, {"n", m.goods()}, {"k", m.k()}, {"bounds", bounds_to_json(m.bounds())}};
        } else {
          return {{"learner", "polytope"}, {"n", m.dimension()}, {"polytope", polytope_to_json(m)}};
        }
      },
      model);
}

inline TrainedModel model_from_json(const json& j) {
  const auto kind = parse_learner(j.at("learner").get<std::string>());
  const auto n = j.at("n").get<std::size_t>();
  switch (kind) {
    case LearnerKind::all_pairs: {
      auto bounds = bounds_from_json(j.at("bounds"));
      if (bounds.size() != n) throw DimensionMismatch("model: bounds size differs from n");
      AllPairsLearner m(std::move(bounds));
      m.finalize();
      return m;
    }
    case LearnerKind::separable: {
      DerivativeGrid g(n, j.at("k").get<int>(), bounds_from_json(j.at("bounds")));
      g.finalize();
      return g;
    }
    case LearnerKind::polytope: {
      auto body = polytope_from_json(j.at("polytope"));
      if (body.dimension() != n) throw DimensionMismatch("model: polytope dimension differs from n");
      return body;
    }
  }
  throw std::invalid_argument("model: unknown learner");
}

/// Parses a trial config. Only the documented keys are accepted; missing
/// optional keys take the TrialConfig defaults.
inline TrialConfig config_from_json(const json& j) {
  static const std::set<std::string> allowed{"learner", "n", "delta", "epsilon", "C", "k",
                                             "dist", "m", "test_size", "seed"};
  static const std::set<std::string> dist_keys{"p_min", "p_max", "B_min", "B_max"};
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  TrialConfig c;
  c.learner = parse_learner(j.at("learner").get<std::string>());
  c.n = j.at("n").get<std::size_t>();
  c.delta = j.at("delta").get<double>();
  if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
  if (j.contains("C")) c.c = j["C"].get<double>();
  if (j.contains("k") && !j["k"].is_null() && !(j["k"].is_string() && j["k"] == "auto")) c.k = j["k"].get<int>();
  if (j.contains("m") && !j["m"].is_null() && !(j["m"].is_string() && j["m"] == "formula")) {
    c.m = j["m"].get<std::uint64_t>();
  }
  if (j.contains("test_size")) c.test_size = j["test_size"].get<std::size_t>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  const auto& d = j.at("dist");
  if (!d.is_object()) throw std::invalid_argument("config: dist must be an object");
  for (const auto& [key, _] : d.items()) {
    if (!dist_keys.count(key)) throw std::invalid_argument("config: unknown dist key '" + key + "'");
  }
  c.p_min = d.at("p_min").get<double>();
  c.p_max = d.at("p_max").get<double>();
  c.budget_min = d.at("B_min").get<double>();
  c.budget_max = d.at("B_max").get<double>();
  c.validate();
  return c;
}

inline json config_to_json(const TrialConfig& c) {
  json j{{"learner", to_string(c.learner)},
         {"n", c.n},
         {"delta", c.delta},
         {"epsilon", c.epsilon},
         {"C", c.c},
         {"dist", {{"p_min", c.p_min}, {"p_max", c.p_max}, {"B_min", c.budget_min}, {"B_max", c.budget_max}}},
         {"test_size", c.test_size},
         {"seed", c.seed}};
  j["k"] = c.k ? json(*c.k) : json("auto");
  j["m"] = c.m ? json(*c.m) : json("formula");
  return j;
}

inline json result_to_json(const TrialResult& r, bool include_timing = true) {
  return {{"m", r.m},
          {"k", r.k},
          {"exact_err", r.exact_error},
          {"eps_err", r.epsilon_error},
          {"notfound_rate", r.notfound_rate},
          {"iterations", r.iterations},
          {"constraints", r.constraints},
          {"cap_reached", r.cap_reached},
          {"seconds", include_timing ? r.seconds : 0.0}};
}

inline json bundle_to_json(const Bundle& x) {
  return {{"bundle", std::vector<double>(x.values().begin(), x.values().end())}};
}

inline Example example_from_json(const json& j) {
  return Example(PriceVector(j.at("prices").get<std::vector<double>>()), j.at("budget").get<double>());
}

}  // namespace revpref
