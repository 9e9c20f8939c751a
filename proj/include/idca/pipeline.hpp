#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idca/baseline.hpp"
#include "idca/config.hpp"
#include "idca/csv.hpp"
#include "idca/dataset.hpp"
#include "idca/dca.hpp"
#include "idca/metrics.hpp"
#include "idca/preorder.hpp"
#include "idca/rng.hpp"
#include "idca/signals.hpp"

namespace idca {

/// Normalized train/test antigens plus what ingest learned on the way.
struct PreparedData {
  Schema schema;
  std::vector<std::size_t> selected;
  NormalizationModel model;
  std::vector<Antigen> train;
  std::vector<Antigen> test;
  NormalizeStats test_stats;
};

inline PreparedData prepare_data(const RunConfig& config) {
  PreparedData d;
  d.schema = config.load_schema();
  d.selected = resolve_features(config.features, d.schema);
  if (config.train.empty()) throw ConfigError("cli", "no train path given");
  if (config.test.empty()) throw ConfigError("cli", "no test path given");
  const auto train = load_dataset(config.train, d.schema, config.strict).records;
  const auto test = load_dataset(config.test, d.schema, config.strict).records;
  d.model = fit_normalizer(train, d.schema, d.selected);
  d.train = normalize(train, d.model, d.schema);
  d.test = normalize(test, d.model, d.schema, 0, &d.test_stats);
  return d;
}

struct RunOutput {
  RunResult result;
  EvaluationReport report;
  nlohmann::ordered_json report_json;
};

/// Runs the configured algorithm on prepared data with an explicit seed.
inline RunOutput run_on(const RunConfig& config, const PreparedData& data, std::uint64_t seed) {
  RunOutput out;
  out.result = config.algorithm == Algorithm::improved
                   ? run_improved_dca(data.test, data.train, config.improved_params(), seed)
                   : run_standard_dca(data.test, data.train, config.standard_params(), seed);
  std::vector<int> truth;
  for (const auto& ag : out.result.prepared.antigens) truth.push_back(ag.true_label.value_or(0));
  out.report = evaluate(out.result.predicted, truth, config.base_rate, config.log_base, out.result.algorithm);

  auto& j = out.report_json;
  j = to_json(out.report);
  j["at"] = out.result.prepared.at;
  j["cycles"] = out.result.cycles;
  j["escalations"] = out.result.escalations;
  j["cells_created"] = out.result.cells.size();
  j["cells_migrated"] = out.result.migrated.size();
  j["cells_retired"] = out.result.retired;
  j["unsampled_antigens"] = out.result.unsampled();
  j["preorder_abnormal"] = out.result.prepared.antigens.size() - out.result.prepared.boundary;
  j["features"] = data.selected.size();
  j["constant_features"] = data.model.constant_features().size();
  j["unknown_categories"] = data.test_stats.unknown_categories;
  j["clamped_values"] = data.test_stats.clamped_values;
  if (const auto empty = out.result.prepared.mapping.empty_categories(); !empty.empty()) {
    auto& arr = j["empty_signal_categories"] = nlohmann::ordered_json::array();
    for (auto c : empty) arr.push_back(std::string(to_string(c)));
  }
  return out;
}

/// (antigen id, MCAV, predicted, true) sorted by id.
inline void write_classification_csv(std::ostream& out, const RunResult& r) {
  std::vector<std::size_t> order(r.prepared.antigens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return r.prepared.antigens[a].id < r.prepared.antigens[b].id; });
  out << "id,mcav,predicted,true\n";
  for (std::size_t i : order) {
    const auto& ag = r.prepared.antigens[i];
    out << ag.id << ',' << csv::format(r.mcav[i]) << ',' << r.predicted[i] << ','
        << (ag.true_label ? std::to_string(*ag.true_label) : std::string{}) << '\n';
  }
}

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cli", "cannot write '" + path.string() + "'");
  f << content;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}
}  // namespace detail

/// Writes report.json, report.csv, classification.csv, run_log.jsonl,
/// resolved_config.json, signals.csv, mapping.csv and preorder.csv.
inline void write_artifacts(const RunConfig& config, const PreparedData& data, const RunOutput& run) {
  namespace fs = std::filesystem;
  const fs::path dir(config.out);
  fs::create_directories(dir);
  const auto& r = run.result;
  detail::write_file(dir / "report.json", run.report_json.dump(2) + "\n");
  detail::write_file(dir / "report.csv", std::string(report_csv_header) + "\n" + report_csv_row(run.report) + "\n");
  detail::write_file(dir / "classification.csv", detail::render([&](std::ostream& o) { write_classification_csv(o, r); }));
  detail::write_file(dir / "run_log.jsonl", detail::render([&](std::ostream& o) { r.log.write_jsonl(o); }));
  detail::write_file(dir / "resolved_config.json", to_json(config).dump(2) + "\n");
  std::vector<std::string> names;
  for (const auto& f : data.model.features) names.push_back(f.name);
  detail::write_file(dir / "mapping.csv",
                     detail::render([&](std::ostream& o) { write_mapping_csv(o, r.prepared.mapping, names); }));
  detail::write_file(dir / "signals.csv", detail::render([&](std::ostream& o) {
                       write_signals_csv(o, r.prepared.antigens, r.prepared.signals, r.prepared.boundary);
                     }));
  detail::write_file(dir / "preorder.csv", detail::render([&](std::ostream& o) {
                       PreorderResult p;
                       p.decisions = r.prepared.decisions;
                       p.boundary = r.prepared.boundary;
                       write_preorder_csv(o, p);
                     }));
}

/// Validate, load, run and write every artifact.
inline RunOutput run_pipeline(const RunConfig& config) {
  config.validate();
  const auto data = prepare_data(config);
  auto out = run_on(config, data, config.seed);
  write_artifacts(config, data, out);
  return out;
}

// ---------------------------------------------------------------------------
// Comparison

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> sd;  // sample sd; empty for a single value
  std::size_t defined = 0;
};

inline MetricSummary summarize_metric(const std::vector<std::optional<double>>& values) {
  std::vector<double> v;
  for (const auto& x : values) {
    if (x) v.push_back(*x);
  }
  MetricSummary s;
  s.defined = v.size();
  if (v.empty()) return s;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.mean = m;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

inline constexpr const char* comparison_metrics[] = {"acc", "dr", "fpr", "fnr", "cc", "cid"};

struct ComparisonRow {
  std::string label;
  std::string algorithm;
  std::size_t repeats = 0;
  std::vector<MetricSummary> metrics;  // in comparison_metrics order
  std::vector<EvaluationReport> runs;
};

/// Runs `config` on derived seeds 0..repeats-1 of its seed.
inline ComparisonRow repeat_runs(const RunConfig& config, const PreparedData& data, std::size_t repeats,
                                 std::string label) {
  if (repeats == 0) throw ConfigError("cli", "repeats must be positive");
  ComparisonRow row;
  row.label = std::move(label);
  row.algorithm = std::string(to_string(config.algorithm));
  row.repeats = repeats;
  for (std::size_t r = 0; r < repeats; ++r) row.runs.push_back(run_on(config, data, derive_seed(config.seed, r)).report);
  auto pick = [&](auto get) {
    std::vector<std::optional<double>> v;
    for (const auto& rep : row.runs) v.push_back(get(rep));
    return summarize_metric(v);
  };
  row.metrics.push_back(pick([](const EvaluationReport& e) { return e.rates.acc; }));
  row.metrics.push_back(pick([](const EvaluationReport& e) { return e.rates.dr; }));
  row.metrics.push_back(pick([](const EvaluationReport& e) { return e.rates.fpr; }));
  row.metrics.push_back(pick([](const EvaluationReport& e) { return e.rates.fnr; }));
  row.metrics.push_back(pick([](const EvaluationReport& e) { return e.cc; }));
  row.metrics.push_back(pick([](const EvaluationReport& e) { return e.cid; }));
  return row;
}

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "config,algorithm,repeats";
  for (const char* m : comparison_metrics) out << ',' << m << "_mean," << m << "_sd";
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? csv::format(*v) : std::string{}; };
  for (const auto& row : rows) {
    out << csv::quote(row.label) << ',' << row.algorithm << ',' << row.repeats;
    for (const auto& m : row.metrics) out << ',' << (m.mean ? csv::format(*m.mean) : "undefined") << ',' << opt(m.sd);
    out << '\n';
  }
}

/// Both configs must read the same train/test files.
inline std::vector<ComparisonRow> compare(const RunConfig& a, const RunConfig& b, std::size_t repeats) {
  a.validate();
  b.validate();
  if (a.train != b.train || a.test != b.test) throw ConfigError("cli", "compared configs must share train/test data");
  const auto data_a = prepare_data(a);
  std::vector<ComparisonRow> rows;
  rows.push_back(repeat_runs(a, data_a, repeats, "A"));
  if (a.features == b.features && a.schema == b.schema && a.strict == b.strict) {
    rows.push_back(repeat_runs(b, data_a, repeats, "B"));
  } else {
    rows.push_back(repeat_runs(b, prepare_data(b), repeats, "B"));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Metrics from a classification CSV

struct Classification {
  std::vector<int> predicted;
  std::vector<int> truth;
};

inline Classification read_classification_csv(std::istream& in) {
  Classification c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = csv::split_line(line);
    if (lineno == 1 && !f.empty() && f[0] == "id") continue;
    if (f.size() != 4) throw DataError("metrics", "line " + std::to_string(lineno) + ": expected 4 columns");
    const auto p = csv::parse_integer(f[2]);
    const auto t = csv::parse_integer(f[3]);
    if (!p || !t || (*p != 0 && *p != 1) || (*t != 0 && *t != 1)) {
      throw DataError("metrics", "line " + std::to_string(lineno) + ": labels must be 0 or 1");
    }
    c.predicted.push_back(static_cast<int>(*p));
    c.truth.push_back(static_cast<int>(*t));
  }
  return c;
}

}  // namespace idca
