#pragma once

#include <string>
#include <string_view>

#include "idca/errors.hpp"
#include "idca/signals.hpp"

namespace idca {

/// Weights of one output signal over (PAMP, SS, DS).
struct WeightRow {
  double pamp = 0.0;
  double ss = 0.0;
  double ds = 0.0;

  double sum() const { return pamp + ss + ds; }
  friend bool operator==(const WeightRow&, const WeightRow&) = default;
};

enum class WcmLayout { standard, printed };

inline std::string_view to_string(WcmLayout l) { return l == WcmLayout::standard ? "standard" : "printed"; }

inline WcmLayout parse_wcm_layout(std::string_view s) {
  if (s == "standard") return WcmLayout::standard;
  if (s == "printed") return WcmLayout::printed;
  throw ConfigError("dca", "unknown weight matrix layout '" + std::string(s) + "'");
}

/// Rows CSM, semi-mature, mature over columns (PAMP, SS, DS).
struct WeightMatrix {
  WeightRow csm;
  WeightRow semi;
  WeightRow mat;

  /// The 2/1/2, 0/0/2, 2/1/-2 table exactly as laid out in print, where the
  /// third column feeds the semi-mature output.
  static WeightMatrix printed() { return {{2, 1, 2}, {0, 0, 2}, {2, 1, -2}}; }

  /// Same weights with the SS and DS columns exchanged, so the safe signal
  /// drives semi-maturation and suppresses maturation as in the classic DCA
  /// weight table.
  static WeightMatrix standard() { return {{2, 2, 1}, {0, 2, 0}, {2, -2, 1}}; }

  static WeightMatrix from(WcmLayout layout) { return layout == WcmLayout::standard ? standard() : printed(); }

  void validate() const {
    if (csm.sum() == 0.0 || semi.sum() == 0.0 || mat.sum() == 0.0) {
      throw ConfigError("dca", "every weight row needs a nonzero sum");
    }
  }
};

/// C = (wP*pamp + wS*ss + wD*ds) / (wP + wS + wD) * (1 + inflammation) / 2
inline double weighted_sum(const SignalVector& s, const WeightRow& w, double inflammation = 1.0) {
  const double denom = w.sum();
  if (denom == 0.0) throw ConfigError("dca", "weight row sums to zero");
  return (w.pamp * s.pamp + w.ss * s.ss + w.ds * s.ds) / denom * (1.0 + inflammation) / 2.0;
}

}  // namespace idca
