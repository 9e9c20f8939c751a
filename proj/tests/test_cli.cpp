#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idca/config.hpp"
#include "idca/csv.hpp"
#include "idca/errors.hpp"

namespace fs = std::filesystem;
using idca::RunConfig;

namespace {

const std::string source_dir = IDCA_SOURCE_DIR;
const std::string cli = IDCA_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("idca_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the CLI from the repository root; stdout goes to `stdout_path`.
  int run(const std::string& args, const std::string& stdout_name = "stdout.txt") {
    const std::string cmd = "cd '" + source_dir + "' && '" + cli + "' " + args + " > '" +
                            (dir_ / stdout_name).string() + "' 2> '" + (dir_ / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  std::string stderr_text() const { return slurp(dir_ / "stderr.txt"); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
  }

  fs::path dir_;
};

const char* const artifacts[] = {"report.json",          "report.csv",  "classification.csv", "run_log.jsonl",
                                 "resolved_config.json", "mapping.csv", "signals.csv",        "preorder.csv"};

}  // namespace

TEST_F(Cli, ImprovedConfigRuns) {
  ASSERT_EQ(run("run --config configs/improved.json --out '" + out("a") + "'"), 0) << stderr_text();
  for (const char* a : artifacts) EXPECT_TRUE(fs::exists(dir_ / "a" / a)) << a;
  const auto report = nlohmann::json::parse(slurp(dir_ / "a" / "report.json"));
  EXPECT_EQ(report["algorithm"], "improved");
  for (const char* k : {"dr", "fpr", "fnr", "acc", "cc", "ppv", "npv", "cid", "cycles", "escalations"}) {
    EXPECT_TRUE(report.contains(k)) << k;
  }
  EXPECT_EQ(report["n"], 100);
  const auto stdout_report = nlohmann::json::parse(slurp(dir_ / "stdout.txt"));
  EXPECT_EQ(stdout_report, report);

  const auto resolved = nlohmann::json::parse(slurp(dir_ / "a" / "resolved_config.json"));
  EXPECT_EQ(resolved["mt_f"], "median");
  EXPECT_EQ(resolved["clone_min"], 0.05);
  EXPECT_TRUE(resolved.contains("escalation"));
  EXPECT_TRUE(resolved.contains("side_damping"));
}

TEST_F(Cli, StandardConfigRuns) {
  ASSERT_EQ(run("run --config configs/standard.json --out '" + out("s") + "'"), 0) << stderr_text();
  const auto report = nlohmann::json::parse(slurp(dir_ / "s" / "report.json"));
  EXPECT_EQ(report["algorithm"], "standard");
  EXPECT_EQ(report["features"], 23);
  EXPECT_EQ(report["at"], 0.5);
  const auto log = slurp(dir_ / "s" / "run_log.jsonl");
  EXPECT_EQ(log.find("\"event\":\"tissue\""), std::string::npos);
  EXPECT_NE(log.find("\"algo\":\"standard\""), std::string::npos);
}

TEST_F(Cli, FlagsOverrideConfig) {
  ASSERT_EQ(run("run --config configs/improved.json --mt-f mean --seed 4 --log-level migrations --out '" +
                out("o") + "'"),
            0)
      << stderr_text();
  const auto resolved = nlohmann::json::parse(slurp(dir_ / "o" / "resolved_config.json"));
  EXPECT_EQ(resolved["mt_f"], "mean");
  EXPECT_EQ(resolved["seed"], 4);
  EXPECT_EQ(resolved["radius_f"], "mean");
  EXPECT_EQ(slurp(dir_ / "o" / "run_log.jsonl").find("\"event\":\"sample\""), std::string::npos);
}

TEST_F(Cli, InvalidFeatureIndexRejectedBeforeWork) {
  EXPECT_EQ(run("run --config configs/improved.json --features 0-5 --out '" + out("bad") + "'"), 1);
  EXPECT_NE(stderr_text().find("feature"), std::string::npos) << stderr_text();
  EXPECT_FALSE(fs::exists(dir_ / "bad"));
  EXPECT_EQ(run("run --config configs/improved.json --features 49 --out '" + out("bad") + "'"), 1);
  EXPECT_FALSE(fs::exists(dir_ / "bad"));
  // Validation happens before the data files are touched.
  EXPECT_EQ(run("run --train /nonexistent.csv --test /nonexistent.csv --features 48 --out '" + out("bad") + "'"), 1);
  EXPECT_NE(stderr_text().find("feature"), std::string::npos) << stderr_text();
}

TEST_F(Cli, OtherValidationFailures) {
  EXPECT_EQ(run("run --config configs/improved.json --clone-min 0.6 --clone-max 0.2 --out '" +
                out("x") + "'"),
            1);
  EXPECT_EQ(run("run --config configs/standard.json --clone-min 2.5 --out '" + out("x") + "'"), 1);
  EXPECT_EQ(run("run --config configs/improved.json --algo fancy --out '" + out("x") + "'"), 1);
  EXPECT_EQ(run("run --train /nonexistent.csv --test /nonexistent.csv --out '" + out("x") + "'"), 1);
  EXPECT_EQ(run("run --config /nonexistent.json"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("run --no-such-flag 1"), 1);
}

TEST_F(Cli, UnknownConfigKeyRejected) {
  write("bogus.json", R"({"train": "data/sample_train.csv", "test": "data/sample_test.csv", "mtt": 3})");
  EXPECT_EQ(run("run --config '" + out("bogus.json") + "' --out '" + out("x") + "'"), 1);
  EXPECT_NE(stderr_text().find("mtt"), std::string::npos);
  write("broken.json", "{not json");
  EXPECT_EQ(run("run --config '" + out("broken.json") + "'"), 1);
}

TEST_F(Cli, CycleCapExitCode) {
  EXPECT_EQ(run("run --config configs/improved.json --cycle-cap 1 --out '" + out("cap") + "'"), 3);
  EXPECT_NE(stderr_text().find("cycle"), std::string::npos) << stderr_text();
}

TEST_F(Cli, ResolvedConfigReplayIsByteIdentical) {
  ASSERT_EQ(run("run --config configs/improved.json --out '" + out("first") + "'"), 0) << stderr_text();
  ASSERT_EQ(run("run --config '" + out("first/resolved_config.json") + "' --out '" + out("second") + "'"), 0)
      << stderr_text();
  for (const char* a : {"report.json", "report.csv", "classification.csv", "run_log.jsonl", "signals.csv"}) {
    EXPECT_EQ(slurp(dir_ / "first" / a), slurp(dir_ / "second" / a)) << a;
  }
  auto r1 = nlohmann::json::parse(slurp(dir_ / "first" / "resolved_config.json"));
  auto r2 = nlohmann::json::parse(slurp(dir_ / "second" / "resolved_config.json"));
  r1.erase("out");
  r2.erase("out");
  EXPECT_EQ(r1, r2);
}

TEST_F(Cli, CompareTable) {
  ASSERT_EQ(run("compare --config-a configs/improved.json --config-b configs/standard.json "
                "--repeats 5 --out '" +
                out("cmp") + "'"),
            0)
      << stderr_text();
  const auto text = slurp(dir_ / "cmp" / "comparison.csv");
  EXPECT_EQ(text, slurp(dir_ / "stdout.txt"));
  std::istringstream in(text);
  std::string header, a, b, extra;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_FALSE(std::getline(in, extra) && !extra.empty());
  EXPECT_EQ(header,
            "config,algorithm,repeats,acc_mean,acc_sd,dr_mean,dr_sd,fpr_mean,fpr_sd,fnr_mean,fnr_sd,cc_mean,cc_sd,"
            "cid_mean,cid_sd");
  EXPECT_EQ(a.substr(0, 13), "A,improved,5,");
  EXPECT_EQ(b.substr(0, 13), "B,standard,5,");
  const auto fields = idca::csv::split_line(a);
  ASSERT_EQ(fields.size(), 15u);
  EXPECT_TRUE(idca::csv::parse_double(fields[3]));
  EXPECT_TRUE(idca::csv::parse_double(fields[4]));
}

TEST_F(Cli, CompareSameConfigAndSingleRepeat) {
  ASSERT_EQ(run("compare --config-a configs/improved.json --config-b configs/improved.json "
                "--repeats 2"),
            0)
      << stderr_text();
  std::istringstream in(slurp(dir_ / "stdout.txt"));
  std::string header, a, b;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(a.substr(1), b.substr(1));

  ASSERT_EQ(run("compare --config-a configs/improved.json --config-b configs/standard.json "
                "--repeats 1"),
            0)
      << stderr_text();
  std::istringstream one(slurp(dir_ / "stdout.txt"));
  std::getline(one, header);
  while (std::getline(one, a)) {
    const auto f = idca::csv::split_line(a);
    ASSERT_EQ(f.size(), 15u);
    for (std::size_t k = 4; k < f.size(); k += 2) EXPECT_TRUE(f[k].empty()) << a;
  }
  EXPECT_EQ(run("compare --config-a configs/improved.json --config-b configs/standard.json "
                "--repeats 0"),
            1);
}

TEST_F(Cli, MetricsSubcommandMatchesReport) {
  ASSERT_EQ(run("run --config configs/improved.json --out '" + out("m") + "'"), 0) << stderr_text();
  ASSERT_EQ(run("metrics --classification '" + out("m/classification.csv") + "'", "metrics.txt"), 0)
      << stderr_text();
  const auto report = nlohmann::json::parse(slurp(dir_ / "m" / "report.json"));
  const auto metrics = nlohmann::json::parse(slurp(dir_ / "metrics.txt"));
  for (const char* k : {"n", "tp", "fp", "tn", "fn", "dr", "fpr", "fnr", "acc", "cc", "ppv", "npv", "cid"}) {
    EXPECT_EQ(metrics[k], report[k]) << k;
  }
  EXPECT_EQ(run("metrics --classification /nonexistent.csv"), 1);
}

TEST_F(Cli, SynthAndIngest) {
  ASSERT_EQ(run("synth --n 300 --attack-fraction 0.3 --seed 2 --out '" + out("flows.csv") + "'"), 0)
      << stderr_text();
  ASSERT_EQ(run("ingest --input '" + out("flows.csv") + "' --n-train 100 --n-test 120 --unseen-fraction 0.05 --seed 1 "
                "--out '" + out("ing") + "'"),
            0)
      << stderr_text();
  for (const char* f : {"train.csv", "test.csv", "train_antigens.csv", "test_antigens.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "ing" / f)) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(dir_ / "stdout.txt"));
  EXPECT_EQ(summary["records"], 300);
  EXPECT_EQ(summary["train"], 100);
  EXPECT_EQ(summary["test"], 120);
  EXPECT_EQ(summary["unseen_records"], 6);
  EXPECT_EQ(summary["features"], 43);

  write("short.csv", "1,2,3\n");
  EXPECT_EQ(run("ingest --input '" + out("short.csv") + "' --out '" + out("ing2") + "'"), 1);
  EXPECT_EQ(run("ingest --input '" + out("short.csv") + "' --lenient --out '" + out("ing3") + "'"), 0);
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig c;
  c.train = "t.csv";
  c.test = "s.csv";
  c.algorithm = idca::Algorithm::standard;
  c.mt = 35;
  c.at = 45;
  c.fixed_mt = 1.5;
  c.self_cap = 12;
  c.mt_f = idca::Summarizer::median;
  c.wcm = idca::WcmLayout::printed;
  const auto j = idca::to_json(c);
  RunConfig back;
  idca::apply_json(back, nlohmann::json::parse(j.dump()));
  EXPECT_EQ(idca::to_json(back).dump(), j.dump());
  EXPECT_EQ(back.effective_at(), 0.45);
  EXPECT_EQ(back.effective_clone_min(), 3.0);

  RunConfig arr;
  idca::apply_json(arr, nlohmann::json::parse(R"({"features": [1, 2, 3, 5]})"));
  EXPECT_EQ(arr.features, "1,2,3,5");
  EXPECT_THROW(idca::apply_json(arr, nlohmann::json::parse(R"({"bogus": 1})")), idca::ConfigError);
  EXPECT_THROW(idca::apply_json(arr, nlohmann::json::parse(R"({"mt": "high"})")), idca::ConfigError);
  EXPECT_THROW(idca::apply_json(arr, nlohmann::json::parse("[1]")), idca::ConfigError);
}

TEST(RunConfigJson, EveryConsumedParameterIsResolved) {
  const auto j = idca::to_json(RunConfig{});
  for (const char* k : {"train", "test", "schema", "features", "algorithm", "mt", "mt_scale", "population", "mt_f",
                        "radius_f", "mt_population", "mcav_semi", "fixed_mt", "clone_min", "clone_max", "at",
                        "at_scale", "seed", "base_rate", "log_base", "cycle_cap", "escalation", "wcm", "inflammation",
                        "k_per_category", "ig_bins", "side_damping", "self_cap", "log_level", "out", "strict"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
}
