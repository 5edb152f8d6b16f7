#pragma once

#include "emobase/learn/tree.hpp"
#include "emobase/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace emobase::learn::detail {

// Per-feature row orderings of one training matrix, computed once and shared
// by every tree grown on it.
struct PresortedData {
  const Matrix* x = nullptr;
  std::vector<std::size_t> cls;  // class position of each row
  std::size_t n_classes = 0;
  std::vector<std::vector<std::uint32_t>> order;  // order[f]: rows sorted by x[.][f], ties by row

  static PresortedData build(const Samples& data, std::span<const int> classes);
};

// Grows one tree on the rows with non-zero weight; weight = bootstrap
// multiplicity. mtry features are drawn per node from `rng`.
TreeModel grow_tree(const PresortedData& data, std::span<const std::uint8_t> weights,
                    const TreeParams& params, std::size_t mtry, Rng& rng,
                    const std::vector<int>& classes);

}  // namespace emobase::learn::detail
