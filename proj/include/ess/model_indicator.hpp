#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ess {

/// Sparse representation of the latent binary vector: the sorted list of
/// active column indices (0-based).
struct ModelIndicator {
  std::vector<int> included;

  int size() const { return static_cast<int>(included.size()); }

  bool contains(int j) const {
    return std::binary_search(included.begin(), included.end(), j);
  }

  void add(int j) {
    auto it = std::lower_bound(included.begin(), included.end(), j);
    if (it == included.end() || *it != j) included.insert(it, j);
  }

  void remove(int j) {
    auto it = std::lower_bound(included.begin(), included.end(), j);
    if (it != included.end() && *it == j) included.erase(it);
  }

  void flip(int j) {
    auto it = std::lower_bound(included.begin(), included.end(), j);
    if (it != included.end() && *it == j)
      included.erase(it);
    else
      included.insert(it, j);
  }

  bool operator==(const ModelIndicator& o) const = default;

  static ModelIndicator from_mask(std::uint64_t mask, int p) {
    ModelIndicator g;
    for (int j = 0; j < p; ++j)
      if (mask >> j & 1) g.included.push_back(j);
    return g;
  }

  static ModelIndicator from_indices(std::vector<int> idx, int p) {
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= p)
        throw std::out_of_range("model index out of range");
      if (i > 0 && idx[i] == idx[i - 1])
        throw std::invalid_argument("duplicate model index");
    }
    ModelIndicator g;
    g.included = std::move(idx);
    return g;
  }
};

}  // namespace ess
