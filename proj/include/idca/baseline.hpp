#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idca/cell.hpp"
#include "idca/dca.hpp"
#include "idca/errors.hpp"
#include "idca/rng.hpp"
#include "idca/run_log.hpp"
#include "idca/weights.hpp"

// Standard DCA: random antigen sampling, constant migration threshold and
// MCAV as the mature share of each antigen's samplers.

namespace idca {

struct SampleDraw {
  std::size_t antigen = 0;  // index into the antigen set
  int multiplicity = 1;
};

/// One draw per cell: an antigen chosen uniformly with replacement and a
/// clone multiplicity uniform in [clone_min, clone_max].
inline std::vector<SampleDraw> random_sample(std::size_t antigen_count, std::size_t cells, int clone_min,
                                             int clone_max, Rng& rng) {
  if (antigen_count == 0) throw DataError("baseline", "cannot sample from an empty antigen set");
  if (cells == 0) throw ConfigError("baseline", "population size must be at least 1");
  if (clone_min < 1 || clone_min > clone_max) throw ConfigError("baseline", "clone range must satisfy 1 <= min <= max");
  std::vector<SampleDraw> out(cells);
  for (auto& d : out) {
    d.antigen = rng.index(antigen_count);
    d.multiplicity = static_cast<int>(rng.between(clone_min, clone_max));
  }
  return out;
}

struct StandardParams {
  double mt = 40.0;
  int clone_min = 3;
  int clone_max = 10;
  std::size_t population = 0;  // 0: one cell per antigen
  WeightMatrix wcm = WeightMatrix::standard();
  double inflammation = 1.0;
  std::size_t cycle_cap = 100;
  double escalation = 0.9;
  std::optional<double> at;
  SignalSetup signals;
  LogLevel log_level = LogLevel::full;

  void validate() const {
    if (!(mt >= 0.0) || !std::isfinite(mt)) throw ConfigError("baseline", "mt must be a finite value >= 0");
    if (clone_min < 1 || clone_min > clone_max) throw ConfigError("baseline", "clone range must satisfy 1 <= min <= max");
    if (cycle_cap == 0) throw ConfigError("baseline", "cycle cap must be positive");
    if (!(escalation > 0.0 && escalation <= 1.0)) throw ConfigError("baseline", "escalation factor must lie in (0,1]");
    wcm.validate();
  }
};

/// Each cycle every immature cell receives one random draw and presents it
/// `multiplicity` times, migrating as soon as CSM > mt. Migrated cells are
/// replaced by naive cells that retire at once, so the population drains.
inline RunResult run_standard_dca(std::span<const Antigen> antigens, std::span<const Antigen> train,
                                  const StandardParams& params, std::uint64_t seed) {
  params.validate();
  RunResult result;
  result.algorithm = "standard";
  result.log.algorithm = "standard";
  result.log.level = params.log_level;
  result.prepared = prepare_antigens(antigens, train, params.signals, params.at);
  const auto& S = result.prepared.antigens;
  if (S.empty()) return result;

  Rng rng(seed);
  const std::size_t population = params.population == 0 ? S.size() : params.population;
  std::vector<std::size_t> U;
  for (std::size_t c = 0; c < population; ++c) {
    DendriticCell dc;
    dc.id = c;
    U.push_back(c);
    result.cells.push_back(std::move(dc));
  }

  while (!U.empty()) {
    const std::size_t cycle = result.cycles + 1;
    if (cycle > params.cycle_cap) {
      throw CycleCapError("baseline", std::to_string(U.size()) + " cell(s) still immature after " +
                                          std::to_string(params.cycle_cap) + " cycles");
    }
    result.cycles = cycle;
    const double mt = params.mt * std::pow(params.escalation, static_cast<double>(result.escalations));
    result.cycle_mt.push_back(mt);
    LogEvent ce{.kind = EventKind::cycle, .cycle = cycle, .tissue = {}};
    ce.mt = mt;
    ce.immature = U.size();
    ce.migrated = result.migrated.size();
    ce.escalations = result.escalations;
    result.log.add(std::move(ce));

    detail::CycleContext ctx{result, params.wcm, params.inflammation, cycle, mt};
    const auto draws = random_sample(S.size(), U.size(), params.clone_min, params.clone_max, rng);
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < U.size(); ++i) {
      auto& dc = result.cells[U[i]];
      dc.clone_budget += draws[i].multiplicity;
      bool migrated = false;
      for (int m = 0; m < draws[i].multiplicity && !migrated; ++m) {
        ctx.present(dc, draws[i].antigen);
        migrated = ctx.migrate_if_ready(dc);
      }
      if (migrated) {
        ctx.replace(dc.id, 0);
      } else {
        ctx.retain(dc);
        next.push_back(dc.id);
      }
    }
    U = std::move(next);
    if (!U.empty() && ctx.migrations == 0 && ctx.csm_growth == 0.0) {
      ++result.escalations;
      LogEvent ee{.kind = EventKind::escalate, .cycle = cycle, .tissue = {}};
      ee.mt = std::pow(params.escalation, static_cast<double>(result.escalations));
      ee.escalations = result.escalations;
      result.log.add(std::move(ee));
    }
  }

  auto mcav = compute_mcav_eq3(result.cells, result.migrated, S);
  result.mcav = std::move(mcav.mcav);
  result.sampled = std::move(mcav.sampled);
  result.predicted = classify(result.mcav, result.prepared.at);
  const auto idx = index_by_id(S);
  for (const auto& dc : result.cells) {
    for (const auto& [ag, times] : dc.ledger) result.prepared.antigens[idx.at(ag)].clone_count += times;
  }
  return result;
}

}  // namespace idca
