#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "idca/csv.hpp"
#include "idca/errors.hpp"
#include "idca/rng.hpp"

namespace idca {

enum class ColumnType { text, integer, real, label };

inline std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::text: return "text";
    case ColumnType::integer: return "integer";
    case ColumnType::real: return "real";
    case ColumnType::label: return "label";
  }
  return "text";
}

inline ColumnType parse_column_type(std::string_view s) {
  if (s == "text") return ColumnType::text;
  if (s == "integer") return ColumnType::integer;
  if (s == "real") return ColumnType::real;
  if (s == "label") return ColumnType::label;
  throw ConfigError("dataset", "unknown column type '" + std::string(s) + "'");
}

namespace detail {
inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}
}  // namespace detail

struct Column {
  std::string name;
  ColumnType type = ColumnType::real;
};

/// Ordered column list of a flow CSV. The special columns (label,
/// attack_cat, proto, service) are located by name, case-insensitively.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
    label_ = find_if_type(ColumnType::label);
    if (!label_) throw ConfigError("dataset", "schema has no label column");
    attack_cat_ = index_of("attack_cat");
    proto_ = index_of("proto");
    service_ = index_of("service");
  }

  /// The 49-column UNSW-NB15 layout.
  static Schema unsw_nb15() {
    using T = ColumnType;
    return Schema({{"srcip", T::text},          {"sport", T::integer},
                   {"dstip", T::text},          {"dsport", T::integer},
                   {"proto", T::text},          {"state", T::text},
                   {"dur", T::real},            {"sbytes", T::integer},
                   {"dbytes", T::integer},      {"sttl", T::integer},
                   {"dttl", T::integer},        {"sloss", T::integer},
                   {"dloss", T::integer},       {"service", T::text},
                   {"sload", T::real},          {"dload", T::real},
                   {"spkts", T::integer},       {"dpkts", T::integer},
                   {"swin", T::integer},        {"dwin", T::integer},
                   {"stcpb", T::integer},       {"dtcpb", T::integer},
                   {"smeansz", T::integer},     {"dmeansz", T::integer},
                   {"trans_depth", T::integer}, {"res_bdy_len", T::integer},
                   {"sjit", T::real},           {"djit", T::real},
                   {"stime", T::integer},       {"ltime", T::integer},
                   {"sintpkt", T::real},        {"dintpkt", T::real},
                   {"tcprtt", T::real},         {"synack", T::real},
                   {"ackdat", T::real},         {"is_sm_ips_ports", T::integer},
                   {"ct_state_ttl", T::integer}, {"ct_flw_http_mthd", T::integer},
                   {"is_ftp_login", T::integer}, {"ct_ftp_cmd", T::integer},
                   {"ct_srv_src", T::integer},  {"ct_srv_dst", T::integer},
                   {"ct_dst_ltm", T::integer},  {"ct_src_ltm", T::integer},
                   {"ct_src_dport_ltm", T::integer}, {"ct_dst_sport_ltm", T::integer},
                   {"ct_dst_src_ltm", T::integer}, {"attack_cat", T::text},
                   {"label", T::label}});
  }

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  const Column& operator[](std::size_t i) const { return columns_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    const auto key = detail::lower(name);
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (detail::lower(columns_[i].name) == key) return i;
    }
    return std::nullopt;
  }

  std::size_t label_index() const { return *label_; }
  std::optional<std::size_t> attack_cat_index() const { return attack_cat_; }
  std::optional<std::size_t> proto_index() const { return proto_; }
  std::optional<std::size_t> service_index() const { return service_; }

  /// Columns that can serve as features (everything but label and attack_cat).
  bool is_feature_column(std::size_t i) const {
    return i < columns_.size() && i != *label_ && (!attack_cat_ || i != *attack_cat_);
  }

 private:
  std::optional<std::size_t> find_if_type(ColumnType t) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].type == t) return i;
    }
    return std::nullopt;
  }

  std::vector<Column> columns_;
  std::optional<std::size_t> label_;
  std::optional<std::size_t> attack_cat_;
  std::optional<std::size_t> proto_;
  std::optional<std::size_t> service_;
};

/// One raw flow row. `fields` keeps the text of every column; `values`
/// holds the parsed number for integer/real/label columns and NaN for text.
struct FlowRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
  std::vector<double> values;
  std::string attack_cat;  // empty for normal traffic
  int label = 0;
};

struct LoadIssue {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<FlowRecord> records;
  std::vector<LoadIssue> issues;
};

/// Parses flow rows. A first row whose label field is not an integer is
/// taken as a header. With `strict`, any malformed row raises a DataError
/// listing every issue; otherwise malformed rows are skipped and reported.
inline LoadResult parse_dataset(std::istream& in, const Schema& schema, bool strict = true) {
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  const auto label_col = schema.label_index();
  const auto cat_col = schema.attack_cat_index();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = csv::split_line(line);
    if (first) {
      first = false;
      if (fields.size() == schema.size() && !csv::parse_integer(fields[label_col])) continue;
    }
    if (fields.size() != schema.size()) {
      result.issues.push_back({lineno, "expected " + std::to_string(schema.size()) +
                                           " columns, found " + std::to_string(fields.size())});
      continue;
    }
    FlowRecord rec;
    rec.line = lineno;
    rec.values.assign(fields.size(), std::numeric_limits<double>::quiet_NaN());
    std::string problem;
    for (std::size_t c = 0; c < fields.size() && problem.empty(); ++c) {
      switch (schema[c].type) {
        case ColumnType::text:
          break;
        case ColumnType::integer:
          if (auto v = csv::parse_integer(fields[c])) {
            rec.values[c] = static_cast<double>(*v);
          } else if (auto d = csv::parse_double(fields[c])) {
            rec.values[c] = *d;
          } else {
            problem = "non-numeric value '" + fields[c] + "' in column " + schema[c].name;
          }
          break;
        case ColumnType::real:
          if (auto d = csv::parse_double(fields[c])) {
            rec.values[c] = *d;
          } else {
            problem = "non-numeric value '" + fields[c] + "' in column " + schema[c].name;
          }
          break;
        case ColumnType::label: {
          const auto v = csv::parse_integer(fields[c]);
          if (!v || (*v != 0 && *v != 1)) {
            problem = "label '" + fields[c] + "' outside {0,1}";
          } else {
            rec.label = static_cast<int>(*v);
            rec.values[c] = static_cast<double>(*v);
          }
          break;
        }
      }
    }
    if (problem.empty() && cat_col) {
      rec.attack_cat = fields[*cat_col];
      if (rec.label == 0 && detail::lower(rec.attack_cat) == "normal") rec.attack_cat.clear();
      if (rec.label == 1 && rec.attack_cat.empty()) {
        problem = "attack row without attack_cat";
      } else if (rec.label == 0 && !rec.attack_cat.empty()) {
        problem = "normal row with attack_cat '" + rec.attack_cat + "'";
      }
    }
    if (!problem.empty()) {
      result.issues.push_back({lineno, problem});
      continue;
    }
    rec.fields = std::move(fields);
    result.records.push_back(std::move(rec));
  }
  if (strict && !result.issues.empty()) {
    std::ostringstream msg;
    msg << result.issues.size() << " malformed row(s):";
    for (const auto& issue : result.issues) msg << " [line " << issue.line << ": " << issue.message << "]";
    throw DataError("dataset", msg.str());
  }
  return result;
}

inline LoadResult load_dataset(const std::string& path, const Schema& schema, bool strict = true) {
  std::ifstream in(path);
  if (!in) throw DataError("dataset", "cannot open '" + path + "'");
  try {
    return parse_dataset(in, schema, strict);
  } catch (const DataError& e) {
    throw DataError("dataset", path + ": " + e.what());
  }
}

inline void write_records_csv(std::ostream& out, const Schema& schema,
                              std::span<const FlowRecord> records) {
  for (std::size_t c = 0; c < schema.size(); ++c) out << (c ? "," : "") << schema[c].name;
  out << '\n';
  for (const auto& r : records) {
    for (std::size_t c = 0; c < r.fields.size(); ++c) out << (c ? "," : "") << csv::quote(r.fields[c]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Feature selection

/// Parses a 1-based feature list such as "1-6.8-11.14.18-24" ('.' or ','
/// separated, ranges inclusive) into sorted 0-based column indices.
inline std::vector<std::size_t> parse_feature_list(std::string_view spec, const Schema& schema) {
  std::set<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto end = spec.find_first_of(".,", pos);
    if (end == std::string_view::npos) end = spec.size();
    auto item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    const auto dash = item.find('-');
    const auto lo = csv::parse_integer(item.substr(0, dash));
    const auto hi = dash == std::string_view::npos ? lo : csv::parse_integer(item.substr(dash + 1));
    if (!lo || !hi || *lo < 1 || *hi < *lo) {
      throw ConfigError("dataset", "bad feature list item '" + std::string(item) + "'");
    }
    for (long long i = *lo; i <= *hi; ++i) {
      const auto col = static_cast<std::size_t>(i - 1);
      if (!schema.is_feature_column(col)) {
        throw ConfigError("dataset", "feature index " + std::to_string(i) +
                                         " is not a feature column of the schema");
      }
      out.insert(col);
    }
  }
  if (out.empty()) throw ConfigError("dataset", "empty feature list");
  return {out.begin(), out.end()};
}

/// Every feature column except identity/timestamp columns
/// (srcip, dstip, stime, ltime). 43 columns for UNSW-NB15.
inline std::vector<std::size_t> default_features(const Schema& schema) {
  static const std::set<std::string> dropped{"srcip", "dstip", "stime", "ltime"};
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema.is_feature_column(c) && !dropped.count(detail::lower(schema[c].name))) out.push_back(c);
  }
  return out;
}

/// "default", "all" or a 1-based list.
inline std::vector<std::size_t> resolve_features(std::string_view spec, const Schema& schema) {
  if (spec.empty() || spec == "default") return default_features(schema);
  if (spec == "all") {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (schema.is_feature_column(c)) out.push_back(c);
    }
    return out;
  }
  return parse_feature_list(spec, schema);
}

// ---------------------------------------------------------------------------
// Antigens and normalization

struct TissueKey {
  std::string proto;
  std::string service;

  auto operator<=>(const TissueKey&) const = default;
  std::string str() const { return proto + "/" + service; }
};

struct Antigen {
  std::size_t id = 0;
  std::vector<double> features;
  TissueKey tissue;
  std::optional<int> true_label;
  int clone_count = 0;
  std::string attack_cat;
};

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Min-max scaler for one feature.
struct MinMax {
  double min = 0.0;
  double max = 0.0;

  bool constant() const { return !(max > min); }

  static MinMax fit(std::span<const double> values) {
    MinMax m{values.front(), values.front()};
    for (double v : values) {
      m.min = std::min(m.min, v);
      m.max = std::max(m.max, v);
    }
    return m;
  }

  /// Constant features map to 0; out-of-range values clamp to [0,1].
  double apply(double v) const {
    if (constant()) return 0.0;
    return std::clamp((v - min) / (max - min), 0.0, 1.0);
  }
};

struct FeatureScale {
  std::size_t column = 0;
  std::string name;
  bool nominal = false;
  std::map<std::string, int> categories;  // sorted-category ordinals
  MinMax range;
};

struct NormalizationModel {
  std::vector<FeatureScale> features;

  std::vector<std::size_t> columns() const {
    std::vector<std::size_t> out;
    for (const auto& f : features) out.push_back(f.column);
    return out;
  }

  /// Positions (into `features`) of constant features.
  std::vector<std::size_t> constant_features() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i].range.constant()) out.push_back(i);
    }
    return out;
  }
};

inline NormalizationModel fit_normalizer(std::span<const FlowRecord> train, const Schema& schema,
                                         std::span<const std::size_t> selected) {
  if (train.empty()) throw DataError("dataset", "cannot fit a normalizer on an empty train set");
  NormalizationModel model;
  for (std::size_t col : selected) {
    if (!schema.is_feature_column(col)) {
      throw ConfigError("dataset", "column " + std::to_string(col + 1) + " is not a feature column");
    }
    FeatureScale f;
    f.column = col;
    f.name = schema[col].name;
    f.nominal = schema[col].type == ColumnType::text;
    std::vector<double> values;
    values.reserve(train.size());
    if (f.nominal) {
      for (const auto& r : train) f.categories.emplace(r.fields[col], 0);
      int ordinal = 0;
      for (auto& [name, value] : f.categories) value = ordinal++;
      for (const auto& r : train) values.push_back(f.categories.at(r.fields[col]));
    } else {
      for (const auto& r : train) values.push_back(r.values[col]);
    }
    f.range = MinMax::fit(values);
    model.features.push_back(std::move(f));
  }
  return model;
}

struct NormalizeStats {
  std::size_t unknown_categories = 0;
  std::size_t clamped_values = 0;
};

inline std::vector<Antigen> normalize(std::span<const FlowRecord> records,
                                      const NormalizationModel& model, const Schema& schema,
                                      std::size_t first_id = 0, NormalizeStats* stats = nullptr) {
  std::vector<Antigen> out;
  out.reserve(records.size());
  const auto proto = schema.proto_index();
  const auto service = schema.service_index();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    Antigen ag;
    ag.id = first_id + i;
    ag.true_label = r.label;
    ag.attack_cat = r.attack_cat;
    if (proto) ag.tissue.proto = r.fields[*proto];
    if (service) ag.tissue.service = r.fields[*service];
    ag.features.reserve(model.features.size());
    for (const auto& f : model.features) {
      double raw = 0.0;
      if (f.nominal) {
        const auto it = f.categories.find(r.fields[f.column]);
        raw = it == f.categories.end() ? -1.0 : it->second;
        if (it == f.categories.end() && stats) ++stats->unknown_categories;
      } else {
        raw = r.values[f.column];
      }
      if (stats && !f.range.constant() && (raw < f.range.min || raw > f.range.max)) ++stats->clamped_values;
      ag.features.push_back(f.range.apply(raw));
    }
    out.push_back(std::move(ag));
  }
  return out;
}

inline void write_antigens_csv(std::ostream& out, std::span<const Antigen> antigens) {
  out << "id,tissue_key";
  const std::size_t dims = antigens.empty() ? 0 : antigens.front().features.size();
  for (std::size_t d = 0; d < dims; ++d) out << ",f" << d;
  out << ",label\n";
  for (const auto& ag : antigens) {
    out << ag.id << ',' << csv::quote(ag.tissue.str());
    for (double v : ag.features) out << ',' << csv::format(v);
    out << ',' << (ag.true_label ? std::to_string(*ag.true_label) : std::string{}) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Train/test extraction

struct Split {
  std::vector<FlowRecord> train;
  std::vector<FlowRecord> test;
  std::vector<std::string> unseen_categories;
  std::size_t unseen_count = 0;
};

/// Uniform selection without replacement. The test subset additionally
/// embeds round(unseen_fraction * n_test) records from attack categories
/// that are absent from the train subset; its remaining records come only
/// from categories present in train.
inline Split split_subsets(std::span<const FlowRecord> records, std::size_t n_train,
                           std::size_t n_test, double unseen_fraction, std::uint64_t seed) {
  if (!(unseen_fraction >= 0.0 && unseen_fraction < 1.0)) {
    throw ConfigError("dataset", "unseen fraction must lie in [0,1)");
  }
  if (n_train + n_test > records.size()) {
    throw DataError("dataset", "insufficient records: need " + std::to_string(n_train + n_test) +
                                   ", have " + std::to_string(records.size()));
  }
  Rng rng(seed);
  Split split;
  split.unseen_count = static_cast<std::size_t>(std::llround(unseen_fraction * static_cast<double>(n_test)));

  std::set<std::string> unseen;
  if (split.unseen_count > 0) {
    std::map<std::string, std::size_t> per_category;
    for (const auto& r : records) {
      if (r.label == 1) ++per_category[r.attack_cat];
    }
    if (per_category.empty()) throw DataError("dataset", "no attack categories available to serve as unseen");
    std::vector<std::string> order;
    for (const auto& [name, count] : per_category) order.push_back(name);
    rng.shuffle(order);
    std::size_t pool = 0;
    for (const auto& name : order) {
      if (pool >= split.unseen_count) break;
      unseen.insert(name);
      pool += per_category[name];
    }
    if (pool < split.unseen_count) throw DataError("dataset", "insufficient records for unseen attacks");
  }

  std::vector<std::size_t> regular;
  std::vector<std::size_t> holdout;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (unseen.count(records[i].attack_cat) ? holdout : regular).push_back(i);
  }
  if (regular.size() < n_train) throw DataError("dataset", "insufficient records for the train subset");
  rng.shuffle(regular);

  std::set<std::string> seen;
  for (std::size_t k = 0; k < n_train; ++k) {
    split.train.push_back(records[regular[k]]);
    seen.insert(records[regular[k]].attack_cat);
  }

  std::vector<std::size_t> test_idx;
  const std::size_t n_regular = n_test - split.unseen_count;
  for (std::size_t k = n_train; k < regular.size() && test_idx.size() < n_regular; ++k) {
    if (seen.count(records[regular[k]].attack_cat)) test_idx.push_back(regular[k]);
  }
  if (test_idx.size() < n_regular) throw DataError("dataset", "insufficient records for the test subset");
  rng.shuffle(holdout);
  test_idx.insert(test_idx.end(), holdout.begin(), holdout.begin() + static_cast<std::ptrdiff_t>(split.unseen_count));
  rng.shuffle(test_idx);
  for (std::size_t i : test_idx) split.test.push_back(records[i]);
  split.unseen_categories.assign(unseen.begin(), unseen.end());
  return split;
}

// ---------------------------------------------------------------------------
// Tissues

/// Groups antigen positions by (proto, service); input order is kept
/// within each group and groups iterate in key order.
inline std::map<TissueKey, std::vector<std::size_t>> partition_tissues(std::span<const Antigen> antigens) {
  std::map<TissueKey, std::vector<std::size_t>> tissues;
  for (std::size_t i = 0; i < antigens.size(); ++i) tissues[antigens[i].tissue].push_back(i);
  return tissues;
}

}  // namespace idca
