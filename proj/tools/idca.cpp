// idca: experiment runner for the improved and standard dendritic cell
// algorithms.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure,
// 3 cycle cap hit.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "idca/config.hpp"
#include "idca/dataset.hpp"
#include "idca/errors.hpp"
#include "idca/metrics.hpp"
#include "idca/pipeline.hpp"
#include "idca/synthetic.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::string> train, test, schema, features, algo, mt_f, radius_f, mt_population, mcav_semi, wcm,
      mt_scale, at_scale, log_level, out;
  std::optional<double> mt, clone_min, clone_max, at, base_rate, log_base, escalation, side_damping;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cycle_cap, population, k;
  bool lenient = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config; flags override it");
    app->add_option("--train", train, "train CSV");
    app->add_option("--test", test, "test CSV");
    app->add_option("--schema", schema, "unsw_nb15 or a JSON column list");
    app->add_option("--features", features, "default, all, or 1-based list like 1-6.8-11");
    app->add_option("--algo", algo, "standard or improved");
    app->add_option("--mt", mt, "constant migration threshold (standard)");
    app->add_option("--mt-scale", mt_scale, "raw or percent");
    app->add_option("--mt-f", mt_f, "mean or median (improved)");
    app->add_option("--radius-f", radius_f, "mean, median or max (improved)");
    app->add_option("--mt-population", mt_population, "immature or full");
    app->add_option("--mcav-semi", mcav_semi, "complement or literal");
    app->add_option("--clone-min", clone_min, "clone range lower bound");
    app->add_option("--clone-max", clone_max, "clone range upper bound");
    app->add_option("--at", at, "anomaly threshold override");
    app->add_option("--at-scale", at_scale, "percent or fraction");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--base-rate", base_rate, "base rate for PPV/NPV/CID");
    app->add_option("--log-base", log_base, "log base for CID");
    app->add_option("--cycle-cap", cycle_cap, "maximum detection cycles");
    app->add_option("--escalation", escalation, "mt factor per stuck cycle");
    app->add_option("--population", population, "standard DCA cell count (0 = one per antigen)");
    app->add_option("--k", k, "features per signal category");
    app->add_option("--side-damping", side_damping, "signal damping across the preorder boundary");
    app->add_option("--wcm", wcm, "standard or printed");
    app->add_option("--log-level", log_level, "full or migrations");
    app->add_option("--out", out, "output directory");
    app->add_flag("--lenient", lenient, "skip malformed rows instead of failing");
  }

  idca::RunConfig resolve() const {
    idca::RunConfig c = config.empty() ? idca::RunConfig{} : idca::load_config(config);
    nlohmann::json j = nlohmann::json::object();
    auto put = [&](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    put("train", train);
    put("test", test);
    put("schema", schema);
    put("features", features);
    put("algorithm", algo);
    put("mt", mt);
    put("mt_scale", mt_scale);
    put("mt_f", mt_f);
    put("radius_f", radius_f);
    put("mt_population", mt_population);
    put("mcav_semi", mcav_semi);
    put("clone_min", clone_min);
    put("clone_max", clone_max);
    put("at", at);
    put("at_scale", at_scale);
    put("seed", seed);
    put("base_rate", base_rate);
    put("log_base", log_base);
    put("cycle_cap", cycle_cap);
    put("escalation", escalation);
    put("population", population);
    put("k_per_category", k);
    put("side_damping", side_damping);
    put("wcm", wcm);
    put("log_level", log_level);
    put("out", out);
    if (lenient) j["strict"] = false;
    idca::apply_json(c, j);
    return c;
  }
};

void print_summary(const idca::RunOutput& run) { std::cout << run.report_json.dump(2) << '\n'; }

int cmd_ingest(const std::string& input, const std::string& schema_arg, const std::string& features, bool lenient,
               std::optional<std::size_t> n_train, std::optional<std::size_t> n_test, double unseen,
               std::uint64_t seed, const std::string& out) {
  idca::RunConfig cfg;
  cfg.schema = schema_arg;
  const auto schema = cfg.load_schema();
  const auto selected = idca::resolve_features(features, schema);
  const auto loaded = idca::load_dataset(input, schema, !lenient);
  nlohmann::ordered_json summary;
  summary["input"] = input;
  summary["records"] = loaded.records.size();
  summary["issues"] = nlohmann::ordered_json::array();
  for (const auto& issue : loaded.issues) {
    summary["issues"].push_back({{"line", issue.line}, {"message", issue.message}});
  }
  summary["features"] = selected.size();

  namespace fs = std::filesystem;
  fs::create_directories(out);
  std::vector<idca::FlowRecord> train = loaded.records;
  std::vector<idca::FlowRecord> test;
  if (n_train || n_test) {
    auto split = idca::split_subsets(loaded.records, n_train.value_or(0), n_test.value_or(0), unseen, seed);
    summary["train"] = split.train.size();
    summary["test"] = split.test.size();
    summary["unseen_categories"] = split.unseen_categories;
    summary["unseen_records"] = split.unseen_count;
    std::ofstream tr(fs::path(out) / "train.csv"), te(fs::path(out) / "test.csv");
    idca::write_records_csv(tr, schema, split.train);
    idca::write_records_csv(te, schema, split.test);
    train = std::move(split.train);
    test = std::move(split.test);
  }
  if (!train.empty()) {
    const auto model = idca::fit_normalizer(train, schema, selected);
    summary["constant_features"] = model.constant_features().size();
    std::ofstream a(fs::path(out) / "train_antigens.csv");
    idca::write_antigens_csv(a, idca::normalize(train, model, schema));
    if (!test.empty()) {
      idca::NormalizeStats stats;
      const auto antigens = idca::normalize(test, model, schema, 0, &stats);
      std::ofstream b(fs::path(out) / "test_antigens.csv");
      idca::write_antigens_csv(b, antigens);
      summary["unknown_categories"] = stats.unknown_categories;
      summary["clamped_values"] = stats.clamped_values;
    }
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Improved and standard dendritic cell algorithm for flow-record anomaly detection"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "validate a flow CSV, optionally split and normalize it");
  std::string ingest_input, ingest_schema = "unsw_nb15", ingest_features = "default", ingest_out = "out";
  std::optional<std::size_t> n_train, n_test;
  double unseen = 0.0;
  std::uint64_t ingest_seed = 1;
  bool ingest_lenient = false;
  ingest->add_option("--input", ingest_input, "flow CSV")->required();
  ingest->add_option("--schema", ingest_schema, "unsw_nb15 or a JSON column list");
  ingest->add_option("--features", ingest_features, "default, all, or 1-based list");
  ingest->add_option("--n-train", n_train, "train subset size");
  ingest->add_option("--n-test", n_test, "test subset size");
  ingest->add_option("--unseen-fraction", unseen, "share of the test subset drawn from categories absent in train");
  ingest->add_option("--seed", ingest_seed, "split seed");
  ingest->add_option("--out", ingest_out, "output directory");
  ingest->add_flag("--lenient", ingest_lenient, "report malformed rows instead of failing");

  auto* run = app.add_subcommand("run", "run one configuration and write its artifacts");
  RunFlags run_flags;
  run_flags.attach(run);

  auto* cmp = app.add_subcommand("compare", "run two configurations over repeated seeds");
  std::string config_a, config_b, cmp_out;
  std::size_t repeats = 5;
  cmp->add_option("--config-a", config_a, "first config")->required();
  cmp->add_option("--config-b", config_b, "second config")->required();
  cmp->add_option("--repeats", repeats, "runs per config");
  cmp->add_option("--out", cmp_out, "directory for comparison.csv");

  auto* met = app.add_subcommand("metrics", "recompute metrics from a classification CSV");
  std::string cls_path;
  double met_base_rate = 1e-5, met_log_base = 2.0;
  met->add_option("--classification", cls_path, "classification.csv")->required();
  met->add_option("--base-rate", met_base_rate, "base rate");
  met->add_option("--log-base", met_log_base, "log base for CID");

  auto* synth = app.add_subcommand("synth", "write a synthetic UNSW-NB15-shaped CSV");
  std::size_t synth_n = 200;
  double synth_attack = 0.3;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  synth->add_option("--n", synth_n, "record count");
  synth->add_option("--attack-fraction", synth_attack, "share of attack records");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--out", synth_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      return cmd_ingest(ingest_input, ingest_schema, ingest_features, ingest_lenient, n_train, n_test, unseen,
                        ingest_seed, ingest_out);
    }
    if (*run) {
      const auto out = idca::run_pipeline(run_flags.resolve());
      print_summary(out);
      return 0;
    }
    if (*cmp) {
      const auto rows = idca::compare(idca::load_config(config_a), idca::load_config(config_b), repeats);
      idca::write_comparison_csv(std::cout, rows);
      if (!cmp_out.empty()) {
        std::filesystem::create_directories(cmp_out);
        std::ofstream f(std::filesystem::path(cmp_out) / "comparison.csv");
        idca::write_comparison_csv(f, rows);
      }
      return 0;
    }
    if (*met) {
      std::ifstream in(cls_path);
      if (!in) throw idca::DataError("metrics", "cannot open '" + cls_path + "'");
      const auto c = idca::read_classification_csv(in);
      std::cout << idca::to_json(idca::evaluate(c.predicted, c.truth, met_base_rate, met_log_base)).dump(2) << '\n';
      return 0;
    }
    if (*synth) {
      if (!(synth_attack >= 0.0 && synth_attack <= 1.0)) throw idca::ConfigError("cli", "attack fraction must lie in [0,1]");
      const auto records = idca::synth_unsw_records(synth_n, synth_attack, synth_seed);
      std::ofstream f(synth_out);
      if (!f) throw idca::DataError("cli", "cannot write '" + synth_out + "'");
      idca::write_records_csv(f, idca::Schema::unsw_nb15(), records);
      return 0;
    }
  } catch (const idca::CycleCapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const idca::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const idca::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
