#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "idca/csv.hpp"
#include "idca/dataset.hpp"
#include "idca/errors.hpp"

namespace idca {

/// Labeled reference vectors (self-normal and self-abnormal). Both sets
/// grow as antigens get labeled; an optional cap freezes a set at that size.
struct SelfSets {
  std::vector<std::vector<double>> normal;
  std::vector<std::vector<double>> abnormal;
  std::optional<std::size_t> cap;

  static SelfSets from_train(std::span<const Antigen> train, std::optional<std::size_t> cap = {}) {
    SelfSets s;
    s.cap = cap;
    for (const auto& ag : train) {
      if (!ag.true_label) throw DataError("preorder", "train antigen " + std::to_string(ag.id) + " has no label");
      (*ag.true_label == 1 ? s.abnormal : s.normal).push_back(ag.features);
    }
    return s;
  }

  std::size_t size() const { return normal.size() + abnormal.size(); }
};

struct PreorderDecision {
  std::size_t antigen_id = 0;
  int label = 0;  // 0 normal, 1 abnormal
  double dist_normal = 0.0;
  double dist_abnormal = 0.0;
};

namespace detail {
inline double min_distance(std::span<const double> x, const std::vector<std::vector<double>>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : set) {
    if (v.size() != x.size()) throw DataError("preorder", "dimension mismatch against self set");
    best = std::min(best, euclidean_distance(x, v));
  }
  return best;
}
}  // namespace detail

/// Labels the antigen by its nearest self set and appends it there.
/// Abnormal only when strictly closer to the abnormal set.
inline PreorderDecision label_by_self_distance(const Antigen& antigen, SelfSets& selves) {
  if (selves.normal.empty() || selves.abnormal.empty()) {
    throw DataError("preorder", "both self sets must be non-empty");
  }
  PreorderDecision d;
  d.antigen_id = antigen.id;
  d.dist_normal = detail::min_distance(antigen.features, selves.normal);
  d.dist_abnormal = detail::min_distance(antigen.features, selves.abnormal);
  d.label = d.dist_normal > d.dist_abnormal ? 1 : 0;
  auto& target = d.label == 1 ? selves.abnormal : selves.normal;
  if (!selves.cap || target.size() < *selves.cap) target.push_back(antigen.features);
  return d;
}

struct PreorderResult {
  std::vector<Antigen> ordered;             // all normal-labeled first, stable
  std::vector<PreorderDecision> decisions;  // aligned with `ordered`
  std::size_t boundary = 0;                 // first abnormal position

  bool on_normal_side(std::size_t position) const { return position < boundary; }
};

/// Labels antigens in input order (the self sets evolve as the pass goes)
/// and stable-sorts them normal-first.
inline PreorderResult preorder_antigen_set(std::span<const Antigen> antigens, SelfSets& selves) {
  std::vector<PreorderDecision> decisions;
  decisions.reserve(antigens.size());
  for (const auto& ag : antigens) decisions.push_back(label_by_self_distance(ag, selves));

  std::vector<std::size_t> order(antigens.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return decisions[a].label < decisions[b].label; });

  PreorderResult out;
  out.ordered.reserve(antigens.size());
  out.decisions.reserve(antigens.size());
  for (std::size_t i : order) {
    out.ordered.push_back(antigens[i]);
    out.decisions.push_back(decisions[i]);
    if (decisions[i].label == 0) ++out.boundary;
  }
  return out;
}

inline void write_preorder_csv(std::ostream& out, const PreorderResult& result) {
  out << "id,label,dist_normal,dist_abnormal\n";
  for (const auto& d : result.decisions) {
    out << d.antigen_id << ',' << d.label << ',' << csv::format(d.dist_normal) << ','
        << csv::format(d.dist_abnormal) << '\n';
  }
}

}  // namespace idca
