#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "idca/errors.hpp"
#include "idca/rng.hpp"
#include "idca/signals.hpp"

// Coverage-radius sampling inside one tissue: clone vector size, DC
// presentation radius, per-antigen radii and the overlap test.

namespace idca {

inline long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5)); }

/// round(u * n + n) for a given clone draw u in [0,1].
inline std::size_t clone_vector_size_for(std::size_t tissue_size, double u) {
  return static_cast<std::size_t>(round_half_up(u * static_cast<double>(tissue_size) + static_cast<double>(tissue_size)));
}

/// Draws u ~ Uniform(mn, mx) and returns the tissue's clone vector size,
/// which lies in [tissue_size, 2 * tissue_size].
inline std::size_t clone_vector_size(std::size_t tissue_size, double mn, double mx, Rng& rng) {
  if (!(0.0 <= mn && mn <= mx && mx <= 1.0)) throw ConfigError("dca", "clone range must satisfy 0 <= min <= max <= 1");
  if (tissue_size == 0) throw ConfigError("dca", "tissue must hold at least one antigen");
  return clone_vector_size_for(tissue_size, rng.uniform(mn, mx));
}

/// (clone_size / (2 * tissue_size)) * F(distances from the DC to the other
/// antigens of its tissue). A lone antigen has radius 0.
inline double presentation_radius(std::span<const double> distances_to_others, std::size_t clone_size,
                                  std::size_t tissue_size, Summarizer f) {
  if (tissue_size <= 1 || distances_to_others.empty()) return 0.0;
  const double share = static_cast<double>(clone_size) / (2.0 * static_cast<double>(tissue_size));
  return share * summarize({distances_to_others.begin(), distances_to_others.end()}, f);
}

/// Own radius of every other antigen as seen from one DC:
///   r_i = |R - d_i| / sum_k |R - d_k| * d_i
/// With `signed_reading` the absolute values are dropped (the sign-mixed
/// arithmetic of the printed example); results may then be negative.
inline std::vector<double> distribute_clone_radii(double radius, std::span<const double> distances,
                                                  bool signed_reading = false) {
  std::vector<double> diff(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    diff[i] = signed_reading ? radius - distances[i] : std::abs(radius - distances[i]);
  }
  const double denom = std::accumulate(diff.begin(), diff.end(), 0.0);
  std::vector<double> r(distances.size(), 0.0);
  if (denom == 0.0) return r;
  for (std::size_t i = 0; i < distances.size(); ++i) r[i] = diff[i] / denom * distances[i];
  return r;
}

/// The DC reaches an antigen iff R + r_Ag > distance (strict).
inline bool overlap(double dc_radius, double antigen_radius, double distance) {
  return dc_radius + antigen_radius > distance;
}

/// Splits `budget` presentations over the covered antigens: one each, the
/// rest proportional to `weights` by largest remainder (earlier entries win
/// ties). All-zero weights split the rest evenly.
inline std::vector<int> allocate_presentations(std::span<const double> weights, std::size_t budget) {
  const std::size_t n = weights.size();
  std::vector<int> count(n, 1);
  if (n == 0) return count;
  if (budget < n) throw Error("dca", "clone budget smaller than the number of covered antigens");
  const double rest = static_cast<double>(budget - n);
  double total = 0.0;
  for (double w : weights) total += std::max(w, 0.0);
  std::vector<double> quota(n);
  for (std::size_t i = 0; i < n; ++i) {
    quota[i] = total > 0.0 ? rest * std::max(weights[i], 0.0) / total : rest / static_cast<double>(n);
  }
  std::size_t given = 0;
  std::vector<double> frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto whole = static_cast<std::size_t>(std::floor(quota[i]));
    count[i] += static_cast<int>(whole);
    given += whole;
    frac[i] = quota[i] - static_cast<double>(whole);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; given < budget - n; ++k, ++given) ++count[order[k % n]];
  return count;
}

}  // namespace idca
