#pragma once

#include <cstddef>
#include <vector>

namespace tsparse {

// Disjoint groups covering [L]. Group k of the stack partition collects the
// k-th output of every filter in a circulant stack.
class GroupPartition {
 public:
  GroupPartition() = default;
  explicit GroupPartition(std::vector<std::vector<std::size_t>> groups);

  static GroupPartition singletons(std::size_t total);
  static GroupPartition circulant_stack(std::size_t n, std::size_t ell);

  const std::vector<std::vector<std::size_t>>& groups() const {
    return groups_;
  }
  std::size_t group_count() const { return groups_.size(); }
  std::size_t total_size() const { return total_; }
  bool is_singletons() const;
  // true when groups[k] == {j*n + k : j in [ell]}
  bool is_stack(std::size_t n, std::size_t ell) const;

  // group index of each element of [L]
  const std::vector<std::size_t>& group_of() const { return group_of_; }

 private:
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> group_of_;
  std::size_t total_ = 0;
};

}  // namespace tsparse
