#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "idca/baseline.hpp"
#include "idca/config.hpp"
#include "idca/dca.hpp"
#include "idca/errors.hpp"
#include "idca/pipeline.hpp"
#include "idca/synthetic.hpp"

using namespace idca;

namespace {

struct ClusterData {
  std::vector<Antigen> train;
  std::vector<Antigen> test;
};

ClusterData cluster_data(std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  ClusterSpec spec;
  return {synth_cluster_antigens(n_train, spec, seed), synth_cluster_antigens(n_test, spec, seed + 1000, 100000)};
}

}  // namespace

TEST(RandomSample, SingleCellSingleAntigen) {
  Rng rng(1);
  const auto d = random_sample(1, 1, 3, 10, rng);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].antigen, 0u);
}

TEST(RandomSample, DeterministicForSeed) {
  Rng a(99), b(99);
  const auto x = random_sample(50, 30, 3, 10, a);
  const auto y = random_sample(50, 30, 3, 10, b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].antigen, y[i].antigen);
    EXPECT_EQ(x[i].multiplicity, y[i].multiplicity);
  }
}

TEST(RandomSample, MultiplicityWithinRangeAndCoverage) {
  Rng rng(5);
  const auto d = random_sample(20, 5000, 5, 10, rng);
  std::map<int, int> seen_mult;
  std::map<std::size_t, int> seen_ag;
  for (const auto& s : d) {
    EXPECT_GE(s.multiplicity, 5);
    EXPECT_LE(s.multiplicity, 10);
    EXPECT_LT(s.antigen, 20u);
    ++seen_mult[s.multiplicity];
    ++seen_ag[s.antigen];
  }
  EXPECT_EQ(seen_mult.size(), 6u);
  EXPECT_EQ(seen_ag.size(), 20u);
}

TEST(RandomSample, Errors) {
  Rng rng(1);
  EXPECT_THROW(random_sample(0, 1, 3, 10, rng), DataError);
  EXPECT_THROW(random_sample(3, 0, 3, 10, rng), ConfigError);
  EXPECT_THROW(random_sample(3, 1, 4, 3, rng), ConfigError);
  EXPECT_THROW(random_sample(3, 1, 0, 3, rng), ConfigError);
}

TEST(RunStandardDca, ZeroMtSingleCycle) {
  const auto d = cluster_data(60, 80, 2);
  StandardParams p;
  p.mt = 0.0;
  const auto r = run_standard_dca(d.test, d.train, p, 1);
  EXPECT_EQ(r.cycles, 1u);
  EXPECT_EQ(r.migrated.size(), d.test.size());
  EXPECT_TRUE(r.unmigrated().empty());
  for (const auto& c : r.cells) {
    if (!c.retired) { EXPECT_EQ(c.presented, 1); }
  }
}

class StandardRunInvariants : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(StandardRunInvariants, Eq3ExactAndNoImprovedPaths) {
  const std::uint64_t seed = GetParam();
  const auto d = cluster_data(80, 150, seed);
  StandardParams p;
  p.mt = 3.0;
  const auto r = run_standard_dca(d.test, d.train, p, seed);
  EXPECT_TRUE(r.unmigrated().empty());
  EXPECT_EQ(r.cycle_mt.size(), r.cycles);

  std::map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < r.prepared.antigens.size(); ++i) pos[r.prepared.antigens[i].id] = i;
  std::vector<int> mature(d.test.size(), 0), total(d.test.size(), 0);
  for (std::size_t c : r.migrated) {
    for (const auto& [id, times] : r.cells[c].ledger) {
      ++total[pos.at(id)];
      mature[pos.at(id)] += r.cells[c].state == CellState::mature;
    }
  }
  for (std::size_t a = 0; a < total.size(); ++a) {
    const double expect = total[a] ? static_cast<double>(mature[a]) / total[a] : 0.0;
    EXPECT_EQ(r.mcav[a], expect);
    EXPECT_EQ(r.sampled[a], total[a] > 0);
    EXPECT_GE(r.mcav[a], 0.0);
    EXPECT_LE(r.mcav[a], 1.0);
  }

  // No tissue partitioning and a constant threshold.
  for (const auto& e : r.log.events) {
    EXPECT_NE(e.kind, EventKind::tissue);
    if (e.kind == EventKind::cycle && e.escalations == 0) { EXPECT_EQ(e.mt, p.mt); }
    if (e.kind == EventKind::migrate_mature || e.kind == EventKind::migrate_semi) { EXPECT_GT(e.csm, e.mt); }
    if (e.kind == EventKind::retain) { EXPECT_LE(e.csm, e.mt); }
    if (e.kind == EventKind::replace) { EXPECT_TRUE(e.retired); }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, StandardRunInvariants, ::testing::Values(1, 2, 3, 4));

TEST(RunStandardDca, PopulationOverride) {
  const auto d = cluster_data(50, 40, 8);
  StandardParams p;
  p.mt = 2.0;
  p.population = 7;
  const auto r = run_standard_dca(d.test, d.train, p, 3);
  EXPECT_EQ(r.cells.size(), 14u);  // seven cells plus their retired replacements
  EXPECT_EQ(r.retired, 7u);
}

TEST(RunStandardDca, CycleCapRaises) {
  const auto d = cluster_data(50, 40, 9);
  StandardParams p;
  p.mt = 1e9;
  p.cycle_cap = 2;
  EXPECT_THROW(run_standard_dca(d.test, d.train, p, 1), CycleCapError);
}

TEST(RunStandardDca, Deterministic) {
  const auto d = cluster_data(50, 60, 10);
  StandardParams p;
  p.mt = 4.0;
  const auto a = run_standard_dca(d.test, d.train, p, 5);
  const auto b = run_standard_dca(d.test, d.train, p, 5);
  EXPECT_EQ(a.mcav, b.mcav);
  std::ostringstream la, lb;
  a.log.write_jsonl(la);
  b.log.write_jsonl(lb);
  EXPECT_EQ(la.str(), lb.str());
}

// Both engines share preorder, mapping, signals and at for identical inputs.
TEST(RunStandardDca, SharesPreparationWithImproved) {
  const auto d = cluster_data(70, 90, 11);
  const auto s = run_standard_dca(d.test, d.train, StandardParams{}, 4);
  const auto i = run_improved_dca(d.test, d.train, ImprovedParams{}, 4);
  EXPECT_EQ(s.prepared.boundary, i.prepared.boundary);
  EXPECT_EQ(s.prepared.at, i.prepared.at);
  EXPECT_EQ(s.prepared.mapping.indices, i.prepared.mapping.indices);
  ASSERT_EQ(s.prepared.signals.size(), i.prepared.signals.size());
  for (std::size_t k = 0; k < s.prepared.signals.size(); ++k) {
    EXPECT_EQ(s.prepared.antigens[k].id, i.prepared.antigens[k].id);
    EXPECT_EQ(s.prepared.signals[k].pamp, i.prepared.signals[k].pamp);
    EXPECT_EQ(s.prepared.signals[k].ss, i.prepared.signals[k].ss);
    EXPECT_EQ(s.prepared.signals[k].ds, i.prepared.signals[k].ds);
  }
  EXPECT_EQ(s.log.algorithm, "standard");
  EXPECT_EQ(i.log.algorithm, "improved");
}

TEST(RunStandardDca, BundledStandardConfigRuns) {
  auto cfg = load_config(std::string(IDCA_SOURCE_DIR) + "/configs/standard.json");
  cfg.train = std::string(IDCA_SOURCE_DIR) + "/" + cfg.train;
  cfg.test = std::string(IDCA_SOURCE_DIR) + "/" + cfg.test;
  cfg.validate();
  EXPECT_EQ(cfg.algorithm, Algorithm::standard);
  const auto data = prepare_data(cfg);
  EXPECT_EQ(data.selected.size(), 23u);
  const auto out = run_on(cfg, data, cfg.seed);
  EXPECT_EQ(out.report.algorithm, "standard");
  EXPECT_EQ(out.report.counts.total(), data.test.size());
  EXPECT_DOUBLE_EQ(out.result.prepared.at, 0.5);
  EXPECT_TRUE(out.result.unmigrated().empty());
}
