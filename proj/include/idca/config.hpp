#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "idca/baseline.hpp"
#include "idca/dataset.hpp"
#include "idca/dca.hpp"
#include "idca/errors.hpp"
#include "idca/signals.hpp"
#include "idca/weights.hpp"

namespace idca {

enum class Algorithm { standard, improved };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::standard ? "standard" : "improved"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "standard") return Algorithm::standard;
  if (s == "improved") return Algorithm::improved;
  throw ConfigError("cli", "unknown algorithm '" + std::string(s) + "'");
}

/// Every parameter a run consumes. `to_json` writes all of them, so a
/// resolved config replays the run exactly.
struct RunConfig {
  std::string train;
  std::string test;
  std::string schema = "unsw_nb15";  // or a path to a JSON column list
  std::string features = "default";
  bool strict = true;
  Algorithm algorithm = Algorithm::improved;

  // standard
  double mt = 40.0;
  std::string mt_scale = "raw";  // raw | percent
  std::size_t population = 0;

  // improved
  Summarizer mt_f = Summarizer::mean;
  Summarizer radius_f = Summarizer::mean;
  MtPopulation mt_population = MtPopulation::immature;
  McavSemi mcav_semi = McavSemi::complement;
  std::optional<double> fixed_mt;  // pins the dynamic mt

  // clone range: fractions for improved, integer multiplicities for standard
  std::optional<double> clone_min;
  std::optional<double> clone_max;

  std::optional<double> at;
  std::string at_scale = "percent";  // percent | fraction
  std::uint64_t seed = 1;
  double base_rate = 1e-5;
  double log_base = 2.0;
  std::size_t cycle_cap = 100;
  double escalation = 0.9;
  WcmLayout wcm = WcmLayout::standard;
  double inflammation = 1.0;
  std::size_t k_per_category = 3;
  std::size_t ig_bins = 10;
  double side_damping = 0.5;
  std::optional<std::size_t> self_cap;
  LogLevel log_level = LogLevel::full;
  std::string out = "out";

  double effective_clone_min() const {
    return clone_min.value_or(algorithm == Algorithm::improved ? 0.15 : 3.0);
  }
  double effective_clone_max() const {
    return clone_max.value_or(algorithm == Algorithm::improved ? 0.35 : 10.0);
  }

  std::optional<double> effective_at() const {
    if (!at) return std::nullopt;
    return at_scale == "percent" ? *at / 100.0 : *at;
  }

  double effective_mt() const { return mt_scale == "percent" ? mt / 100.0 : mt; }

  Schema load_schema() const;

  /// Throws ConfigError on the first invalid field. Feature indices are
  /// checked against the schema here, before any data is read.
  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("cli", msg); };
    if (mt_scale != "raw" && mt_scale != "percent") fail("mt_scale must be raw or percent");
    if (at_scale != "percent" && at_scale != "fraction") fail("at_scale must be percent or fraction");
    if (!(mt >= 0.0) || !std::isfinite(mt)) fail("mt must be a finite value >= 0");
    if (mt_f == Summarizer::max) fail("mt_f must be mean or median");
    if (fixed_mt && !(*fixed_mt >= 0.0)) fail("fixed_mt must be >= 0");
    const double mn = effective_clone_min(), mx = effective_clone_max();
    if (algorithm == Algorithm::improved) {
      if (!(0.0 <= mn && mn <= mx && mx <= 1.0)) fail("clone range must satisfy 0 <= clone_min <= clone_max <= 1");
    } else {
      if (mn != std::floor(mn) || mx != std::floor(mx) || mn < 1 || mn > mx) {
        fail("standard clone range must be integers with 1 <= clone_min <= clone_max");
      }
    }
    if (const auto a = effective_at(); a && !(*a >= 0.0 && *a <= 1.0)) fail("at must lie in [0,1] after scaling");
    if (!(base_rate > 0.0 && base_rate < 1.0)) fail("base_rate must lie in (0,1)");
    if (!(log_base > 0.0 && log_base != 1.0)) fail("log_base must be positive and != 1");
    if (cycle_cap == 0) fail("cycle_cap must be positive");
    if (!(escalation > 0.0 && escalation <= 1.0)) fail("escalation must lie in (0,1]");
    if (k_per_category == 0) fail("k_per_category must be positive");
    if (ig_bins == 0) fail("ig_bins must be positive");
    if (!(side_damping >= 0.0 && side_damping <= 1.0)) fail("side_damping must lie in [0,1]");
    if (!std::isfinite(inflammation)) fail("inflammation must be finite");
    WeightMatrix::from(wcm).validate();
    const auto selected = resolve_features(features, load_schema());
    if (selected.size() < 3 * k_per_category) {
      fail("need at least " + std::to_string(3 * k_per_category) + " features, have " +
           std::to_string(selected.size()));
    }
  }

  ImprovedParams improved_params() const {
    ImprovedParams p;
    p.clone_min = effective_clone_min();
    p.clone_max = effective_clone_max();
    p.radius_f = radius_f;
    p.mt_f = mt_f;
    p.mt_population = mt_population;
    p.mcav_semi = mcav_semi;
    p.wcm = WeightMatrix::from(wcm);
    p.inflammation = inflammation;
    p.cycle_cap = cycle_cap;
    p.escalation = escalation;
    p.at = effective_at();
    p.signals = signal_setup();
    p.log_level = log_level;
    p.fixed_mt = fixed_mt;
    return p;
  }

  StandardParams standard_params() const {
    StandardParams p;
    p.mt = effective_mt();
    p.clone_min = static_cast<int>(effective_clone_min());
    p.clone_max = static_cast<int>(effective_clone_max());
    p.population = population;
    p.wcm = WeightMatrix::from(wcm);
    p.inflammation = inflammation;
    p.cycle_cap = cycle_cap;
    p.escalation = escalation;
    p.at = effective_at();
    p.signals = signal_setup();
    p.log_level = log_level;
    return p;
  }

  SignalSetup signal_setup() const {
    SignalSetup s;
    s.k_per_category = k_per_category;
    s.ig_bins = ig_bins;
    s.policy.side_damping = side_damping;
    s.self_cap = self_cap;
    return s;
  }
};

inline Schema schema_from_json(const nlohmann::json& j) {
  std::vector<Column> cols;
  for (const auto& c : j) cols.push_back({c.at("name").get<std::string>(), parse_column_type(c.at("type").get<std::string>())});
  return Schema(std::move(cols));
}

inline Schema RunConfig::load_schema() const {
  if (schema == "unsw_nb15") return Schema::unsw_nb15();
  std::ifstream in(schema);
  if (!in) throw ConfigError("cli", "cannot open schema file '" + schema + "'");
  try {
    return schema_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cli", "bad schema file '" + schema + "': " + e.what());
  }
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  j["train"] = c.train;
  j["test"] = c.test;
  j["schema"] = c.schema;
  j["features"] = c.features;
  j["strict"] = c.strict;
  j["algorithm"] = to_string(c.algorithm);
  j["mt"] = c.mt;
  j["mt_scale"] = c.mt_scale;
  j["population"] = c.population;
  j["mt_f"] = to_string(c.mt_f);
  j["radius_f"] = to_string(c.radius_f);
  j["mt_population"] = to_string(c.mt_population);
  j["mcav_semi"] = to_string(c.mcav_semi);
  j["fixed_mt"] = opt(c.fixed_mt);
  j["clone_min"] = c.effective_clone_min();
  j["clone_max"] = c.effective_clone_max();
  j["at"] = opt(c.at);
  j["at_scale"] = c.at_scale;
  j["seed"] = c.seed;
  j["base_rate"] = c.base_rate;
  j["log_base"] = c.log_base;
  j["cycle_cap"] = c.cycle_cap;
  j["escalation"] = c.escalation;
  j["wcm"] = to_string(c.wcm);
  j["inflammation"] = c.inflammation;
  j["k_per_category"] = c.k_per_category;
  j["ig_bins"] = c.ig_bins;
  j["side_damping"] = c.side_damping;
  j["self_cap"] = opt(c.self_cap);
  j["log_level"] = to_string(c.log_level);
  j["out"] = c.out;
  return j;
}

/// Applies the keys present in `j` on top of `c`. Unknown keys are errors.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("cli", "config must be a JSON object");
  static const std::set<std::string> known{
      "train",     "test",          "schema",        "features",   "strict",    "algorithm", "mt",
      "mt_scale",  "population",    "mt_f",          "radius_f",   "mt_population", "mcav_semi", "fixed_mt", "clone_min",
      "clone_max", "at",            "at_scale",      "seed",       "base_rate", "log_base",  "cycle_cap",
      "escalation", "wcm",          "inflammation",  "k_per_category", "ig_bins", "side_damping", "self_cap",
      "log_level", "out"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("cli", "unknown config key '" + key + "'");
  }
  try {
    auto str = [&](const char* k, std::string& dst) {
      if (j.contains(k)) dst = j.at(k).get<std::string>();
    };
    auto num = [&](const char* k, auto& dst) {
      if (j.contains(k)) dst = j.at(k).get<std::decay_t<decltype(dst)>>();
    };
    auto optnum = [&](const char* k, auto& dst) {
      if (!j.contains(k)) return;
      if (j.at(k).is_null()) {
        dst.reset();
      } else {
        dst = j.at(k).get<typename std::decay_t<decltype(dst)>::value_type>();
      }
    };
    str("train", c.train);
    str("test", c.test);
    str("schema", c.schema);
    if (j.contains("features")) {
      const auto& f = j.at("features");
      if (f.is_array()) {
        std::string joined;
        for (const auto& item : f) joined += (joined.empty() ? "" : ",") + std::to_string(item.get<long long>());
        c.features = joined;
      } else {
        c.features = f.get<std::string>();
      }
    }
    num("strict", c.strict);
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    num("mt", c.mt);
    str("mt_scale", c.mt_scale);
    num("population", c.population);
    if (j.contains("mt_f")) c.mt_f = parse_summarizer(j.at("mt_f").get<std::string>());
    if (j.contains("radius_f")) c.radius_f = parse_summarizer(j.at("radius_f").get<std::string>());
    if (j.contains("mt_population")) c.mt_population = parse_mt_population(j.at("mt_population").get<std::string>());
    if (j.contains("mcav_semi")) c.mcav_semi = parse_mcav_semi(j.at("mcav_semi").get<std::string>());
    optnum("fixed_mt", c.fixed_mt);
    optnum("clone_min", c.clone_min);
    optnum("clone_max", c.clone_max);
    optnum("at", c.at);
    str("at_scale", c.at_scale);
    num("seed", c.seed);
    num("base_rate", c.base_rate);
    num("log_base", c.log_base);
    num("cycle_cap", c.cycle_cap);
    num("escalation", c.escalation);
    if (j.contains("wcm")) c.wcm = parse_wcm_layout(j.at("wcm").get<std::string>());
    num("inflammation", c.inflammation);
    num("k_per_category", c.k_per_category);
    num("ig_bins", c.ig_bins);
    num("side_damping", c.side_damping);
    optnum("self_cap", c.self_cap);
    if (j.contains("log_level")) c.log_level = parse_log_level(j.at("log_level").get<std::string>());
    str("out", c.out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cli", std::string("bad config value: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "cannot open config '" + path + "'");
  RunConfig c;
  try {
    apply_json(c, nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cli", "config '" + path + "' is not valid JSON: " + e.what());
  }
  return c;
}

}  // namespace idca
