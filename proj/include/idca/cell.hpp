#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "idca/dataset.hpp"
#include "idca/errors.hpp"
#include "idca/signals.hpp"
#include "idca/weights.hpp"

namespace idca {

enum class CellState { immature, semi_mature, mature };

inline constexpr std::size_t no_position = std::numeric_limits<std::size_t>::max();

struct DendriticCell {
  std::size_t id = 0;
  std::size_t position = no_position;  // index of the antigen the cell sits on
  TissueKey tissue;
  double coverage_radius = 0.0;
  double csm = 0.0;
  double semi = 0.0;
  double mat = 0.0;
  std::vector<std::pair<std::size_t, int>> ledger;  // antigen id -> presentations, insertion order
  int clone_budget = 0;
  int presented = 0;
  std::optional<double> context;
  CellState state = CellState::immature;
  std::size_t migrated_cycle = 0;
  bool retired = false;  // naive replacement with nothing left to sample

  bool immature() const { return state == CellState::immature; }

  int presentations_of(std::size_t antigen_id) const {
    for (const auto& [id, n] : ledger) {
      if (id == antigen_id) return n;
    }
    return 0;
  }
};

/// Adds one presentation of an antigen's signals to the cell's cumulative
/// CSM, semi-mature and mature outputs.
inline void update_cumulative(DendriticCell& dc, std::size_t antigen_id, const SignalVector& s,
                              const WeightMatrix& wcm, double inflammation = 1.0) {
  if (!dc.immature()) throw Error("dca", "cell " + std::to_string(dc.id) + " already migrated");
  dc.csm += weighted_sum(s, wcm.csm, inflammation);
  dc.semi += weighted_sum(s, wcm.semi, inflammation);
  dc.mat += weighted_sum(s, wcm.mat, inflammation);
  ++dc.presented;
  auto it = std::find_if(dc.ledger.begin(), dc.ledger.end(), [&](const auto& e) { return e.first == antigen_id; });
  if (it == dc.ledger.end()) {
    dc.ledger.emplace_back(antigen_id, 1);
  } else {
    ++it->second;
  }
}

/// mat / (mat + semi) clamped to [0,1] for a positive sum. Non-positive sums
/// (possible with a negative mature weight) give 0.5 when semi == mat and 0
/// otherwise, so that context >= 0.5 exactly when semi <= mat.
inline double context_value(double semi, double mat) {
  const double sum = semi + mat;
  if (sum > 0.0) return std::clamp(mat / sum, 0.0, 1.0);
  return semi <= mat ? 0.5 : 0.0;
}

/// Assigns the context once and moves the cell to its migrated state:
/// mature iff cumulative semi <= cumulative mat.
inline double assign_context(DendriticCell& dc) {
  if (dc.context) throw Error("dca", "context of cell " + std::to_string(dc.id) + " already assigned");
  const double c = context_value(dc.semi, dc.mat);
  dc.context = c;
  dc.state = dc.semi <= dc.mat ? CellState::mature : CellState::semi_mature;
  return c;
}

/// Migrates (and assigns context) iff cumulative CSM strictly exceeds mt.
inline bool try_migrate(DendriticCell& dc, double mt) {
  if (!dc.immature()) throw Error("dca", "cell " + std::to_string(dc.id) + " already migrated");
  if (!(dc.csm > mt)) return false;
  assign_context(dc);
  return true;
}

}  // namespace idca
