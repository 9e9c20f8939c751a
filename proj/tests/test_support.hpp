#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idca/dataset.hpp"

namespace idca::testing {

inline Antigen make_antigen(std::size_t id, std::vector<double> features, std::optional<int> label = {},
                            TissueKey tissue = {"tcp", "-"}) {
  Antigen ag;
  ag.id = id;
  ag.features = std::move(features);
  ag.true_label = label;
  ag.tissue = std::move(tissue);
  return ag;
}

inline std::vector<std::size_t> ids_of(const std::vector<Antigen>& ags) {
  std::vector<std::size_t> out;
  for (const auto& a : ags) out.push_back(a.id);
  return out;
}

}  // namespace idca::testing
