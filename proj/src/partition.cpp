#include "tsparse/partition.hpp"

#include <stdexcept>

namespace tsparse {

GroupPartition::GroupPartition(std::vector<std::vector<std::size_t>> groups)
    : groups_(std::move(groups)) {
  for (const auto& g : groups_) total_ += g.size();
  group_of_.assign(total_, total_);
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    for (std::size_t idx : groups_[j]) {
      if (idx >= total_)
        throw std::invalid_argument("partition: index out of range");
      if (group_of_[idx] != total_)
        throw std::invalid_argument("partition: groups overlap");
      group_of_[idx] = j;
    }
  }
  // coverage is implied: total_ indices, no overlaps, all in range
}

GroupPartition GroupPartition::singletons(std::size_t total) {
  std::vector<std::vector<std::size_t>> g(total);
  for (std::size_t k = 0; k < total; ++k) g[k] = {k};
  return GroupPartition(std::move(g));
}

GroupPartition GroupPartition::circulant_stack(std::size_t n,
                                               std::size_t ell) {
  std::vector<std::vector<std::size_t>> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k].reserve(ell);
    for (std::size_t j = 0; j < ell; ++j) g[k].push_back(j * n + k);
  }
  return GroupPartition(std::move(g));
}

bool GroupPartition::is_singletons() const {
  for (const auto& g : groups_)
    if (g.size() != 1) return false;
  return true;
}

bool GroupPartition::is_stack(std::size_t n, std::size_t ell) const {
  if (groups_.size() != n || total_ != n * ell) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (groups_[k].size() != ell) return false;
    for (std::size_t j = 0; j < ell; ++j)
      if (groups_[k][j] != j * n + k) return false;
  }
  return true;
}

}  // namespace tsparse
