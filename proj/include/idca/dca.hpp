#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idca/cell.hpp"
#include "idca/dataset.hpp"
#include "idca/errors.hpp"
#include "idca/preorder.hpp"
#include "idca/rng.hpp"
#include "idca/run_log.hpp"
#include "idca/sampling.hpp"
#include "idca/signals.hpp"
#include "idca/weights.hpp"

namespace idca {

// ---------------------------------------------------------------------------
// Shared preprocessing: preorder, signal mapping, per-antigen signals, at.

struct SignalSetup {
  std::size_t k_per_category = 3;
  std::size_t ig_bins = 10;
  SignalPolicy policy;
  std::optional<std::size_t> self_cap;
};

struct PreparedAntigens {
  std::vector<Antigen> antigens;  // preordered: normal-labeled first
  std::vector<PreorderDecision> decisions;
  std::size_t boundary = 0;
  SignalMapping mapping;
  std::vector<SignalVector> signals;  // aligned with `antigens`
  double at = 0.0;
};

inline PreparedAntigens prepare_antigens(std::span<const Antigen> antigens, std::span<const Antigen> train,
                                         const SignalSetup& setup, std::optional<double> at_override) {
  PreparedAntigens out;
  if (train.empty()) throw DataError("dca", "train set is empty");
  out.at = at_override ? *at_override : anomaly_threshold(train);
  if (!(out.at >= 0.0 && out.at <= 1.0)) throw ConfigError("dca", "anomaly threshold must lie in [0,1]");
  out.mapping = build_signal_mapping(score_features(train, setup.ig_bins), setup.k_per_category);
  if (antigens.empty()) return out;
  auto selves = SelfSets::from_train(train, setup.self_cap);
  auto pre = preorder_antigen_set(antigens, selves);
  out.antigens = std::move(pre.ordered);
  out.decisions = std::move(pre.decisions);
  out.boundary = pre.boundary;
  out.signals.reserve(out.antigens.size());
  for (std::size_t i = 0; i < out.antigens.size(); ++i) {
    const Side side = i < out.boundary ? Side::normal : Side::abnormal;
    out.signals.push_back(compute_signals(out.antigens[i].features, out.mapping, side, setup.policy));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run result shared by both algorithms.

struct RunResult {
  std::string algorithm;
  PreparedAntigens prepared;
  std::vector<DendriticCell> cells;  // every cell created; id == index
  std::vector<std::size_t> migrated;  // cell ids in migration order
  std::vector<double> mcav;           // aligned with prepared.antigens
  std::vector<int> predicted;
  std::vector<bool> sampled;  // sampled by at least one migrated cell
  std::vector<double> cycle_mt;
  std::size_t cycles = 0;
  std::size_t escalations = 0;
  std::size_t retired = 0;
  RunLog log;

  std::size_t unsampled() const {
    std::size_t n = 0;
    for (bool s : sampled) n += !s;
    return n;
  }

  /// Cells still immature (the final U; empty after a completed run).
  std::vector<std::size_t> unmigrated() const {
    std::vector<std::size_t> out;
    for (const auto& c : cells) {
      if (c.immature() && !c.retired) out.push_back(c.id);
    }
    return out;
  }
};

inline std::unordered_map<std::size_t, std::size_t> index_by_id(std::span<const Antigen> antigens) {
  std::unordered_map<std::size_t, std::size_t> out;
  for (std::size_t i = 0; i < antigens.size(); ++i) out.emplace(antigens[i].id, i);
  return out;
}

/// Label 1 (attack) iff MCAV > at.
inline std::vector<int> classify(std::span<const double> mcav, double at) {
  std::vector<int> out;
  out.reserve(mcav.size());
  for (double m : mcav) out.push_back(m > at ? 1 : 0);
  return out;
}

// ---------------------------------------------------------------------------
// Coverage planning inside a tissue

struct Coverage {
  double radius = 0.0;
  std::vector<std::size_t> others;     // member positions other than the DC's own
  std::vector<double> antigen_radii;   // r_Ag, aligned with `others`
  std::vector<std::size_t> covered;    // member positions passing the overlap test
  std::vector<int> counts;             // presentations per covered antigen
  std::vector<std::size_t> sequence;   // member positions in presentation order
};

/// Plans what the DC sitting on member `self` presents. `row` holds the
/// distances from `self` to every member of the tissue. Covered antigens are
/// presented in tissue order, each `counts[i]` times in a row; a DC that
/// covers nothing presents its own antigen for the whole budget.
inline Coverage plan_coverage(std::size_t self, std::span<const double> row, std::size_t clone_size, Summarizer f,
                              std::optional<double> pinned_radius = {}) {
  Coverage cov;
  std::vector<double> dist;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k == self) continue;
    cov.others.push_back(k);
    dist.push_back(row[k]);
  }
  cov.radius = pinned_radius ? *pinned_radius : presentation_radius(dist, clone_size, row.size(), f);
  cov.antigen_radii = distribute_clone_radii(cov.radius, dist);
  std::vector<double> weights;
  for (std::size_t i = 0; i < cov.others.size(); ++i) {
    if (overlap(cov.radius, cov.antigen_radii[i], dist[i])) {
      cov.covered.push_back(cov.others[i]);
      weights.push_back(cov.antigen_radii[i]);
    }
  }
  if (cov.covered.empty()) {
    cov.covered.push_back(self);
    cov.counts.push_back(static_cast<int>(clone_size));
  } else {
    cov.counts = allocate_presentations(weights, clone_size);
  }
  for (std::size_t i = 0; i < cov.covered.size(); ++i) {
    cov.sequence.insert(cov.sequence.end(), static_cast<std::size_t>(cov.counts[i]), cov.covered[i]);
  }
  return cov;
}

// ---------------------------------------------------------------------------
// MCAV

enum class McavSemi { complement, literal };

inline std::string_view to_string(McavSemi m) { return m == McavSemi::complement ? "complement" : "literal"; }

inline McavSemi parse_mcav_semi(std::string_view s) {
  if (s == "complement") return McavSemi::complement;
  if (s == "literal") return McavSemi::literal;
  throw ConfigError("dca", "unknown MCAV semi mode '" + std::string(s) + "'");
}

struct McavResult {
  std::vector<double> mcav;
  std::vector<bool> sampled;
};

namespace detail {
inline std::vector<double> min_max_normalized(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = *hi > *lo ? (v[i] - *lo) / (*hi - *lo) : (v[i] > 0.0 ? 1.0 : 0.0);
  }
  return out;
}
}  // namespace detail

/// Modified MCAV. Per antigen, the counts of semi-mature and mature migrated
/// samplers are min-max normalized across antigens. Each migrated sampler
/// then scores the antigen:
///   mature: mean(mat_share, presented / budget)
///   semi:   mean(semi_share, (budget - presented) / budget), complemented
///           (1 - score) in McavSemi::complement mode
/// and the antigen's MCAV is the mean score. Antigens no migrated cell
/// sampled get 0 and are reported through `sampled`.
inline McavResult compute_mcav(std::span<const DendriticCell> cells, std::span<const std::size_t> migrated,
                               std::span<const Antigen> antigens, McavSemi mode = McavSemi::complement) {
  const auto idx = index_by_id(antigens);
  const std::size_t n = antigens.size();
  std::vector<double> semi_count(n, 0.0), mat_count(n, 0.0);
  for (std::size_t c : migrated) {
    const auto& cell = cells[c];
    for (const auto& [id, times] : cell.ledger) {
      const auto it = idx.find(id);
      if (it == idx.end()) throw Error("dca", "ledger references unknown antigen " + std::to_string(id));
      (cell.state == CellState::mature ? mat_count : semi_count)[it->second] += 1.0;
    }
  }
  const auto semi_norm = detail::min_max_normalized(semi_count);
  const auto mat_norm = detail::min_max_normalized(mat_count);

  std::vector<double> sum(n, 0.0), cnt(n, 0.0);
  for (std::size_t c : migrated) {
    const auto& cell = cells[c];
    const double present = cell.clone_budget > 0 ? static_cast<double>(cell.presented) / cell.clone_budget : 0.0;
    for (const auto& [id, times] : cell.ledger) {
      const std::size_t a = idx.at(id);
      const double denom = mat_norm[a] + semi_norm[a];
      const double mat_share = denom > 0.0 ? mat_norm[a] / denom : mat_count[a] / (mat_count[a] + semi_count[a]);
      const double semi_share = 1.0 - mat_share;
      double score = 0.0;
      if (cell.state == CellState::mature) {
        score = 0.5 * (mat_share + present);
      } else {
        score = 0.5 * (semi_share + (1.0 - present));
        if (mode == McavSemi::complement) score = 1.0 - score;
      }
      sum[a] += score;
      cnt[a] += 1.0;
    }
  }
  McavResult out;
  out.mcav.assign(n, 0.0);
  out.sampled.assign(n, false);
  for (std::size_t a = 0; a < n; ++a) {
    if (cnt[a] > 0.0) {
      out.mcav[a] = std::clamp(sum[a] / cnt[a], 0.0, 1.0);
      out.sampled[a] = true;
    }
  }
  return out;
}

/// Mature samplers / all samplers per antigen (distinct migrated cells).
inline McavResult compute_mcav_eq3(std::span<const DendriticCell> cells, std::span<const std::size_t> migrated,
                                   std::span<const Antigen> antigens) {
  const auto idx = index_by_id(antigens);
  std::vector<double> mature(antigens.size(), 0.0), total(antigens.size(), 0.0);
  for (std::size_t c : migrated) {
    for (const auto& [id, times] : cells[c].ledger) {
      const std::size_t a = idx.at(id);
      total[a] += 1.0;
      if (cells[c].state == CellState::mature) mature[a] += 1.0;
    }
  }
  McavResult out;
  out.mcav.assign(antigens.size(), 0.0);
  out.sampled.assign(antigens.size(), false);
  for (std::size_t a = 0; a < antigens.size(); ++a) {
    if (total[a] > 0.0) {
      out.mcav[a] = mature[a] / total[a];
      out.sampled[a] = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Improved DCA

enum class MtPopulation { immature, full };

inline std::string_view to_string(MtPopulation m) { return m == MtPopulation::immature ? "immature" : "full"; }

inline MtPopulation parse_mt_population(std::string_view s) {
  if (s == "immature") return MtPopulation::immature;
  if (s == "full") return MtPopulation::full;
  throw ConfigError("dca", "unknown mt population '" + std::string(s) + "'");
}

struct ImprovedParams {
  double clone_min = 0.15;
  double clone_max = 0.35;
  Summarizer radius_f = Summarizer::mean;
  Summarizer mt_f = Summarizer::mean;
  MtPopulation mt_population = MtPopulation::immature;
  McavSemi mcav_semi = McavSemi::complement;
  WeightMatrix wcm = WeightMatrix::standard();
  double inflammation = 1.0;
  std::size_t cycle_cap = 100;
  double escalation = 0.9;
  std::optional<double> at;
  SignalSetup signals;
  LogLevel log_level = LogLevel::full;
  std::optional<double> fixed_mt;  // replaces the per-cycle dynamic value

  void validate() const {
    if (fixed_mt && !(*fixed_mt >= 0.0)) throw ConfigError("dca", "fixed mt must be >= 0");
    if (!(0.0 <= clone_min && clone_min <= clone_max && clone_max <= 1.0)) {
      throw ConfigError("dca", "clone range must satisfy 0 <= min <= max <= 1");
    }
    if (mt_f == Summarizer::max) throw ConfigError("dca", "mt summarizer must be mean or median");
    if (cycle_cap == 0) throw ConfigError("dca", "cycle cap must be positive");
    if (!(escalation > 0.0 && escalation <= 1.0)) throw ConfigError("dca", "escalation factor must lie in (0,1]");
    wcm.validate();
  }
};

namespace detail {

struct Position {
  std::string tissue;
  std::size_t antigen = 0;  // antigen index the DC sits on
  double radius = 0.0;
  std::vector<std::size_t> queue;  // antigen indices
  std::size_t cursor = 0;
};

/// Bookkeeping shared by both engines within one cycle.
struct CycleContext {
  RunResult& result;
  const WeightMatrix& wcm;
  double inflammation;
  std::size_t cycle;
  double mt;
  std::size_t migrations = 0;
  double csm_growth = 0.0;

  void present(DendriticCell& dc, std::size_t antigen_index) {
    const auto& ag = result.prepared.antigens[antigen_index];
    const double before = dc.csm;
    update_cumulative(dc, ag.id, result.prepared.signals[antigen_index], wcm, inflammation);
    csm_growth += std::abs(dc.csm - before);
    LogEvent e{.kind = EventKind::sample, .cycle = cycle, .tissue = dc.tissue.str(), .cell = dc.id, .antigen = ag.id};
    e.csm = dc.csm;
    e.semi = dc.semi;
    e.mat = dc.mat;
    result.log.add(std::move(e));
  }

  bool migrate_if_ready(DendriticCell& dc) {
    if (!try_migrate(dc, mt)) return false;
    dc.migrated_cycle = cycle;
    ++migrations;
    result.migrated.push_back(dc.id);
    LogEvent e{.kind = dc.state == CellState::mature ? EventKind::migrate_mature : EventKind::migrate_semi,
               .cycle = cycle,
               .tissue = dc.tissue.str(),
               .cell = dc.id};
    e.csm = dc.csm;
    e.semi = dc.semi;
    e.mat = dc.mat;
    e.context = *dc.context;
    e.mt = mt;
    result.log.add(std::move(e));
    return true;
  }

  /// Adds the naive replacement of `old_id`; it is retired right away when
  /// it has no presentations left.
  std::size_t replace(std::size_t old_id, int budget) {
    DendriticCell fresh;
    fresh.id = result.cells.size();
    fresh.position = result.cells[old_id].position;
    fresh.tissue = result.cells[old_id].tissue;
    fresh.coverage_radius = result.cells[old_id].coverage_radius;
    fresh.clone_budget = budget;
    fresh.retired = budget == 0;
    if (fresh.retired) ++result.retired;
    LogEvent e{.kind = EventKind::replace, .cycle = cycle, .tissue = fresh.tissue.str(), .cell = fresh.id};
    e.replaces = old_id;
    e.retired = fresh.retired;
    result.log.add(std::move(e));
    result.cells.push_back(std::move(fresh));
    return result.cells.back().id;
  }

  void retain(const DendriticCell& dc) {
    LogEvent e{.kind = EventKind::retain, .cycle = cycle, .tissue = dc.tissue.str(), .cell = dc.id};
    e.csm = dc.csm;
    e.semi = dc.semi;
    e.mat = dc.mat;
    e.mt = mt;
    result.log.add(std::move(e));
  }
};

}  // namespace detail

/// Outcome of one detection pass: E split by context, U, and contexts.
struct MigrationOutcome {
  std::vector<std::size_t> semi_cells;
  std::vector<std::size_t> mature_cells;
  std::vector<std::size_t> unmigrated;
  std::vector<std::pair<std::size_t, double>> contexts;
  std::size_t presentations = 0;
  double csm_growth = 0.0;
};

/// One detection pass of the improved DCA over the cells in `U` (in order).
/// Each cell works through the rest of its position's queue, migrating as
/// soon as CSM > mt; a migrated cell's naive replacement continues the
/// queue. Cells that end the pass immature form the new U.
inline MigrationOutcome run_detection(RunResult& result, std::vector<detail::Position>& positions,
                                      std::span<const std::size_t> U, const ImprovedParams& params,
                                      std::size_t cycle, double mt) {
  detail::CycleContext ctx{result, params.wcm, params.inflammation, cycle, mt};
  MigrationOutcome out;
  auto record = [&](std::size_t id) {
    const auto& dc = result.cells[id];
    (dc.state == CellState::mature ? out.mature_cells : out.semi_cells).push_back(id);
    out.contexts.emplace_back(id, *dc.context);
  };
  for (std::size_t id : U) {
    auto& pos = positions[result.cells[id].position];
    bool presented = false;
    while (true) {
      if (pos.cursor < pos.queue.size()) {
        ctx.present(result.cells[id], pos.queue[pos.cursor++]);
        presented = true;
        ++out.presentations;
        if (ctx.migrate_if_ready(result.cells[id])) {
          record(id);
          const auto left = static_cast<int>(pos.queue.size() - pos.cursor);
          const std::size_t next = ctx.replace(id, left);
          if (left == 0) break;
          id = next;
          presented = false;
        }
        continue;
      }
      if (!presented && ctx.migrate_if_ready(result.cells[id])) {
        record(id);
        ctx.replace(id, 0);
        break;
      }
      out.unmigrated.push_back(id);
      ctx.retain(result.cells[id]);
      break;
    }
  }
  out.csm_growth = ctx.csm_growth;
  return out;
}

/// Full improved DCA: preorder, IG signal mapping, per-tissue coverage
/// sampling with the dynamic migration threshold, modified MCAV and
/// classification against at. Results are aligned with the preordered
/// antigen set in `result.prepared`.
inline RunResult run_improved_dca(std::span<const Antigen> antigens, std::span<const Antigen> train,
                                  const ImprovedParams& params, std::uint64_t seed) {
  params.validate();
  RunResult result;
  result.algorithm = "improved";
  result.log.algorithm = "improved";
  result.log.level = params.log_level;
  result.prepared = prepare_antigens(antigens, train, params.signals, params.at);
  const auto& S = result.prepared.antigens;
  const auto& sig = result.prepared.signals;
  if (S.empty()) return result;

  Rng rng(seed);
  std::vector<detail::Position> positions;
  std::vector<std::size_t> U;
  for (const auto& [key, members] : partition_tissues(S)) {
    const std::size_t n = members.size();
    const std::size_t clone = clone_vector_size(n, params.clone_min, params.clone_max, rng);
    LogEvent te{.kind = EventKind::tissue, .cycle = 1, .tissue = key.str()};
    te.size = n;
    te.clone_size = clone;
    result.log.add(std::move(te));
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) row[k] = euclidean_distance(S[members[j]].features, S[members[k]].features);
      const auto cov = plan_coverage(j, row, clone, params.radius_f);
      detail::Position pos;
      pos.tissue = key.str();
      pos.antigen = members[j];
      pos.radius = cov.radius;
      for (std::size_t m : cov.sequence) pos.queue.push_back(members[m]);
      DendriticCell dc;
      dc.id = result.cells.size();
      dc.position = positions.size();
      dc.tissue = key;
      dc.coverage_radius = cov.radius;
      dc.clone_budget = static_cast<int>(pos.queue.size());
      positions.push_back(std::move(pos));
      U.push_back(dc.id);
      result.cells.push_back(std::move(dc));
    }
  }

  const auto idx = index_by_id(S);
  while (!U.empty()) {
    const std::size_t cycle = result.cycles + 1;
    if (cycle > params.cycle_cap) {
      throw CycleCapError("dca", std::to_string(U.size()) + " cell(s) still immature after " +
                                     std::to_string(params.cycle_cap) + " cycles");
    }
    result.cycles = cycle;
    std::vector<SignalVector> pool;
    if (cycle == 1 || params.mt_population == MtPopulation::full) {
      pool = sig;
    } else {
      std::set<std::size_t> seen;
      for (std::size_t id : U) {
        for (const auto& [ag, times] : result.cells[id].ledger) seen.insert(idx.at(ag));
      }
      for (std::size_t a : seen) pool.push_back(sig[a]);
      if (pool.empty()) pool = sig;
    }
    const double base = params.fixed_mt ? *params.fixed_mt : dynamic_mt(signal_probabilities(pool, params.mt_f));
    const double mt = base *
                      std::pow(params.escalation, static_cast<double>(result.escalations));
    result.cycle_mt.push_back(mt);
    LogEvent ce{.kind = EventKind::cycle, .cycle = cycle, .tissue = {}};
    ce.mt = mt;
    ce.immature = U.size();
    ce.migrated = result.migrated.size();
    ce.escalations = result.escalations;
    result.log.add(std::move(ce));

    auto outcome = run_detection(result, positions, U, params, cycle, mt);
    const bool stuck = outcome.semi_cells.empty() && outcome.mature_cells.empty() && outcome.csm_growth == 0.0;
    U = std::move(outcome.unmigrated);
    if (stuck && !U.empty()) {
      ++result.escalations;
      LogEvent ee{.kind = EventKind::escalate, .cycle = cycle, .tissue = {}};
      ee.mt = std::pow(params.escalation, static_cast<double>(result.escalations));
      ee.escalations = result.escalations;
      result.log.add(std::move(ee));
    }
  }

  auto mcav = compute_mcav(result.cells, result.migrated, S, params.mcav_semi);
  result.mcav = std::move(mcav.mcav);
  result.sampled = std::move(mcav.sampled);
  result.predicted = classify(result.mcav, result.prepared.at);
  for (const auto& dc : result.cells) {
    for (const auto& [ag, times] : dc.ledger) result.prepared.antigens[idx.at(ag)].clone_count += times;
  }
  return result;
}

}  // namespace idca
