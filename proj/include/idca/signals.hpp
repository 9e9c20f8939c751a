#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idca/csv.hpp"
#include "idca/dataset.hpp"
#include "idca/errors.hpp"

namespace idca {

enum class Summarizer { mean, median, max };

inline std::string_view to_string(Summarizer f) {
  switch (f) {
    case Summarizer::mean: return "mean";
    case Summarizer::median: return "median";
    case Summarizer::max: return "max";
  }
  return "mean";
}

inline Summarizer parse_summarizer(std::string_view s) {
  if (s == "mean" || s == "avg") return Summarizer::mean;
  if (s == "median") return Summarizer::median;
  if (s == "max") return Summarizer::max;
  throw ConfigError("signals", "unknown summarizer '" + std::string(s) + "'");
}

/// Mean, median (even counts average the two middle values) or max.
/// Empty input yields 0.
inline double summarize(std::vector<double> values, Summarizer f) {
  if (values.empty()) return 0.0;
  switch (f) {
    case Summarizer::mean:
      return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    case Summarizer::max:
      return *std::max_element(values.begin(), values.end());
    case Summarizer::median: {
      const std::size_t n = values.size();
      std::sort(values.begin(), values.end());
      return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }
  }
  return 0.0;
}

struct SignalVector {
  double pamp = 0.0;
  double ss = 0.0;
  double ds = 0.0;

  friend bool operator==(const SignalVector&, const SignalVector&) = default;
};

struct SignalProbabilities {
  double pamp = 0.0;
  double ss = 0.0;
  double ds = 0.0;
};

enum class SignalCategory { pamp = 0, ss = 1, ds = 2 };

inline std::string_view to_string(SignalCategory c) {
  switch (c) {
    case SignalCategory::pamp: return "PAMP";
    case SignalCategory::ss: return "SS";
    case SignalCategory::ds: return "DS";
  }
  return "PAMP";
}

/// Feature positions (into the antigen feature vector) per signal category.
struct SignalMapping {
  std::array<std::vector<std::size_t>, 3> indices;
  std::vector<double> scores;  // information gain per feature position

  const std::vector<std::size_t>& of(SignalCategory c) const { return indices[static_cast<int>(c)]; }

  std::vector<SignalCategory> empty_categories() const {
    std::vector<SignalCategory> out;
    for (int c = 0; c < 3; ++c) {
      if (indices[c].empty()) out.push_back(static_cast<SignalCategory>(c));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Information gain

namespace detail {
inline double entropy2(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

inline std::size_t bin_of(double v, std::size_t bins) {
  const auto b = static_cast<long long>(std::floor(v * static_cast<double>(bins)));
  return static_cast<std::size_t>(std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1));
}
}  // namespace detail

/// IG(class; feature) in bits, with the feature discretized into `bins`
/// equal-width bins over [0,1].
inline double information_gain(std::span<const Antigen> train, std::size_t feature, std::size_t bins = 10) {
  if (train.empty()) throw DataError("signals", "information gain needs a non-empty train set");
  if (bins == 0) throw ConfigError("signals", "bin count must be positive");
  std::vector<std::array<double, 2>> table(bins, {0.0, 0.0});
  std::array<double, 2> cls{0.0, 0.0};
  for (const auto& ag : train) {
    if (!ag.true_label) throw DataError("signals", "information gain needs labeled antigens");
    if (feature >= ag.features.size()) throw ConfigError("signals", "feature index out of range");
    const int y = *ag.true_label;
    table[detail::bin_of(ag.features[feature], bins)][y] += 1.0;
    cls[y] += 1.0;
  }
  const double n = static_cast<double>(train.size());
  const double h_class = detail::entropy2(cls, n);
  double h_cond = 0.0;
  for (const auto& row : table) {
    const double m = row[0] + row[1];
    if (m > 0.0) h_cond += (m / n) * detail::entropy2(row, m);
  }
  return std::max(0.0, h_class - h_cond);
}

inline std::vector<double> score_features(std::span<const Antigen> train, std::size_t bins = 10) {
  if (train.empty()) throw DataError("signals", "cannot score features of an empty train set");
  std::vector<double> scores;
  for (std::size_t f = 0; f < train.front().features.size(); ++f) scores.push_back(information_gain(train, f, bins));
  return scores;
}

/// Ranks features by score (descending, ties by ascending index) and hands
/// ranks [0,k) to PAMP, [k,2k) to SS and [2k,3k) to DS.
inline SignalMapping build_signal_mapping(std::span<const double> scores, std::size_t k) {
  if (k == 0) throw ConfigError("signals", "features per category must be positive");
  if (scores.size() < 3 * k) {
    throw ConfigError("signals", "need at least " + std::to_string(3 * k) + " features, have " +
                                     std::to_string(scores.size()));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  SignalMapping m;
  m.scores.assign(scores.begin(), scores.end());
  for (std::size_t r = 0; r < 3 * k; ++r) m.indices[r / k].push_back(order[r]);
  return m;
}

// ---------------------------------------------------------------------------
// Per-antigen signals

enum class Side { normal, abnormal };

struct SignalPolicy {
  /// Damping of the side-coupled components (DS on the normal side, SS on
  /// the abnormal side).
  double side_damping = 0.5;
};

namespace detail {
inline double mean_of(std::span<const double> features, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i : idx) s += features[i];
  return s / static_cast<double>(idx.size());
}
}  // namespace detail

/// pamp = mean of PAMP features; ss = 1 - mean of SS features (damped on the
/// abnormal side); ds = mean of DS features (damped on the normal side).
/// An empty category yields 0 for that component.
inline SignalVector compute_signals(std::span<const double> features, const SignalMapping& mapping, Side side,
                                    const SignalPolicy& policy = {}) {
  const auto& pamp_idx = mapping.of(SignalCategory::pamp);
  const auto& ss_idx = mapping.of(SignalCategory::ss);
  const auto& ds_idx = mapping.of(SignalCategory::ds);
  const double damp = std::clamp(policy.side_damping, 0.0, 1.0);
  SignalVector s;
  s.pamp = detail::mean_of(features, pamp_idx);
  s.ss = ss_idx.empty() ? 0.0 : 1.0 - detail::mean_of(features, ss_idx);
  s.ds = detail::mean_of(features, ds_idx);
  if (side == Side::normal) {
    s.ds *= damp;
  } else {
    s.ss *= damp;
  }
  s.pamp = std::clamp(s.pamp, 0.0, 1.0);
  s.ss = std::clamp(s.ss, 0.0, 1.0);
  s.ds = std::clamp(s.ds, 0.0, 1.0);
  return s;
}

inline SignalProbabilities signal_probabilities(std::span<const SignalVector> vectors, Summarizer f) {
  if (vectors.empty()) throw DataError("signals", "signal probabilities need at least one vector");
  if (f == Summarizer::max) throw ConfigError("signals", "signal probabilities take mean or median");
  std::vector<double> p, s, d;
  for (const auto& v : vectors) {
    p.push_back(v.pamp);
    s.push_back(v.ss);
    d.push_back(v.ds);
  }
  return {summarize(std::move(p), f), summarize(std::move(s), f), summarize(std::move(d), f)};
}

/// Migration threshold from signal probabilities, weighted 2/1/2 like the
/// CSM row: result lies in [0,5].
inline double dynamic_mt(const SignalProbabilities& pr) { return 2.0 * pr.pamp + pr.ss + 2.0 * pr.ds; }

/// Fraction of attack records in the train set.
inline double anomaly_threshold(std::span<const Antigen> train) {
  if (train.empty()) throw DataError("signals", "anomaly threshold needs a non-empty train set");
  std::size_t attacks = 0;
  for (const auto& ag : train) {
    if (!ag.true_label) throw DataError("signals", "anomaly threshold needs labeled antigens");
    attacks += *ag.true_label == 1;
  }
  return static_cast<double>(attacks) / static_cast<double>(train.size());
}

inline void write_mapping_csv(std::ostream& out, const SignalMapping& m, std::span<const std::string> names = {}) {
  out << "category,feature,column,ig\n";
  for (int c = 0; c < 3; ++c) {
    for (std::size_t f : m.indices[c]) {
      out << to_string(static_cast<SignalCategory>(c)) << ',' << f << ','
          << (f < names.size() ? csv::quote(names[f]) : std::string{}) << ',' << csv::format(m.scores[f]) << '\n';
    }
  }
}

inline void write_signals_csv(std::ostream& out, std::span<const Antigen> antigens, std::span<const SignalVector> sig,
                              std::size_t boundary) {
  out << "id,pamp,ss,ds,side\n";
  for (std::size_t i = 0; i < antigens.size(); ++i) {
    out << antigens[i].id << ',' << csv::format(sig[i].pamp) << ',' << csv::format(sig[i].ss) << ','
        << csv::format(sig[i].ds) << ',' << (i < boundary ? "normal" : "abnormal") << '\n';
  }
}

}  // namespace idca
