#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "idca/csv.hpp"
#include "idca/errors.hpp"

namespace idca {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Attack (1) is the positive class.
inline ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("metrics", "predicted/truth length mismatch: " + std::to_string(predicted.size()) + " vs " +
                                   std::to_string(truth.size()));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1) throw DataError("metrics", "truth label outside {0,1}");
    if (predicted[i] != 0 && predicted[i] != 1) throw DataError("metrics", "predicted label outside {0,1}");
    if (truth[i] == 1) {
      (predicted[i] == 1 ? c.tp : c.fn) += 1;
    } else {
      (predicted[i] == 1 ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

/// Percentages; a rate with a zero denominator is empty.
struct BasicRates {
  std::optional<double> dr;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> acc;
};

namespace detail {
inline std::optional<double> percent(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

inline BasicRates basic_rates(const ConfusionCounts& c) {
  BasicRates r;
  r.dr = detail::percent(c.tp, c.tp + c.fn);
  r.fpr = detail::percent(c.fp, c.fp + c.tn);
  r.fnr = detail::percent(c.fn, c.tp + c.fn);
  r.acc = detail::percent(c.tp + c.tn, c.total());
  return r;
}

/// Matthews correlation; empty when any marginal sum is zero.
inline std::optional<double> correlation_coefficient(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  const double den = (tp + fn) * (tp + fp) * (tn + fp) * (tn + fn);
  if (den == 0.0) return std::nullopt;
  return std::clamp((tp * tn - fp * fn) / std::sqrt(den), -1.0, 1.0);
}

/// Base rate B plus false-positive rate alpha and false-negative rate beta,
/// all as fractions.
struct CapabilityInputs {
  double base_rate = 1e-5;
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const {
    if (!(base_rate > 0.0 && base_rate < 1.0)) throw ConfigError("metrics", "base rate must lie in (0,1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("metrics", "false-positive rate must lie in [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("metrics", "false-negative rate must lie in [0,1]");
  }
};

/// Inputs from a confusion matrix; empty when FPR or FNR is undefined.
inline std::optional<CapabilityInputs> capability_inputs(const ConfusionCounts& c, double base_rate) {
  if (c.fp + c.tn == 0 || c.tp + c.fn == 0) return std::nullopt;
  CapabilityInputs in;
  in.base_rate = base_rate;
  in.alpha = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  in.beta = static_cast<double>(c.fn) / static_cast<double>(c.tp + c.fn);
  return in;
}

struct PredictiveValues {
  std::optional<double> ppv;
  std::optional<double> npv;
};

/// PPV = B*TP / (B*TP + (1-B)*FP) and NPV = (1-B)(1-FP) / ((1-B)(1-FP) + B*FN)
/// with TP = 1 - beta, FP = alpha, FN = beta.
inline PredictiveValues ppv_npv(const CapabilityInputs& in) {
  in.validate();
  const double b = in.base_rate;
  const double tp = 1.0 - in.beta;
  PredictiveValues out;
  const double ppv_den = b * tp + (1.0 - b) * in.alpha;
  if (ppv_den > 0.0) out.ppv = b * tp / ppv_den;
  const double npv_num = (1.0 - b) * (1.0 - in.alpha);
  const double npv_den = npv_num + b * in.beta;
  if (npv_den > 0.0) out.npv = npv_num / npv_den;
  return out;
}

namespace detail {
/// -coef * log(x); a zero coefficient contributes 0, log(0) otherwise is
/// undefined.
inline std::optional<double> neg_term(double coef, std::optional<double> x, double log_base) {
  if (coef == 0.0) return 0.0;
  if (!x || *x <= 0.0) return std::nullopt;
  return -coef * std::log(*x) / std::log(log_base);
}
}  // namespace detail

/// Capability of intrusion detection, four-term simplified form:
///   -B(1-b) log PPV - B(1-b) log(1-NPV) - (1-B)(1-a) log NPV - (1-B) a log(1-PPV)
/// Empty when a term with a nonzero coefficient takes log(0) or PPV/NPV is
/// undefined.
inline std::optional<double> cid(const CapabilityInputs& in, double log_base = 2.0) {
  if (!(log_base > 0.0 && log_base != 1.0)) throw ConfigError("metrics", "log base must be positive and != 1");
  const auto pv = ppv_npv(in);
  const double b = in.base_rate;
  auto complement = [](std::optional<double> v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return 1.0 - *v;
  };
  const std::optional<double> terms[] = {
      detail::neg_term(b * (1.0 - in.beta), pv.ppv, log_base),
      detail::neg_term(b * (1.0 - in.beta), complement(pv.npv), log_base),
      detail::neg_term((1.0 - b) * (1.0 - in.alpha), pv.npv, log_base),
      detail::neg_term((1.0 - b) * in.alpha, complement(pv.ppv), log_base),
  };
  double sum = 0.0;
  for (const auto& t : terms) {
    if (!t) return std::nullopt;
    sum += *t;
  }
  return sum;
}

struct EvaluationReport {
  std::string algorithm;
  ConfusionCounts counts;
  BasicRates rates;
  std::optional<double> cc;
  std::optional<double> ppv;
  std::optional<double> npv;
  std::optional<double> cid;
  double base_rate = 1e-5;
  double log_base = 2.0;
};

inline EvaluationReport evaluate(std::span<const int> predicted, std::span<const int> truth, double base_rate = 1e-5,
                                 double log_base = 2.0, std::string algorithm = {}) {
  EvaluationReport r;
  r.algorithm = std::move(algorithm);
  r.counts = confusion(predicted, truth);
  r.rates = basic_rates(r.counts);
  r.cc = correlation_coefficient(r.counts);
  r.base_rate = base_rate;
  r.log_base = log_base;
  if (!(base_rate > 0.0 && base_rate < 1.0)) throw ConfigError("metrics", "base rate must lie in (0,1)");
  if (const auto in = capability_inputs(r.counts, base_rate)) {
    const auto pv = ppv_npv(*in);
    r.ppv = pv.ppv;
    r.npv = pv.npv;
    r.cid = cid(*in, log_base);
  }
  return r;
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json("undefined");
}

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = r.algorithm;
  j["n"] = r.counts.total();
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["tn"] = r.counts.tn;
  j["fn"] = r.counts.fn;
  j["dr"] = optional_json(r.rates.dr);
  j["fpr"] = optional_json(r.rates.fpr);
  j["fnr"] = optional_json(r.rates.fnr);
  j["acc"] = optional_json(r.rates.acc);
  j["cc"] = optional_json(r.cc);
  j["ppv"] = optional_json(r.ppv);
  j["npv"] = optional_json(r.npv);
  j["cid"] = optional_json(r.cid);
  j["base_rate"] = r.base_rate;
  j["log_base"] = r.log_base;
  return j;
}

inline constexpr const char* report_csv_header = "algorithm,n,tp,fp,tn,fn,dr,fpr,fnr,acc,cc,ppv,npv,cid";

inline std::string report_csv_row(const EvaluationReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::format(*v) : std::string("undefined"); };
  return csv::quote(r.algorithm) + ',' + std::to_string(r.counts.total()) + ',' + std::to_string(r.counts.tp) + ',' +
         std::to_string(r.counts.fp) + ',' + std::to_string(r.counts.tn) + ',' + std::to_string(r.counts.fn) + ',' +
         opt(r.rates.dr) + ',' + opt(r.rates.fpr) + ',' + opt(r.rates.fnr) + ',' + opt(r.rates.acc) + ',' +
         opt(r.cc) + ',' + opt(r.ppv) + ',' + opt(r.npv) + ',' + opt(r.cid);
}

}  // namespace idca
