#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"

namespace xstable {

// A set partition of some index set M. Blocks are pairwise disjoint,
// non-empty, and their union is M. Blocks appear in order of their least
// member, which is the order restricted-growth enumeration produces.
struct SetPartition {
  std::vector<IndexSet> blocks;

  IndexSet ground() const {
    IndexSet u;
    for (IndexSet b : blocks) u = u | b;
    return u;
  }
};

// Partition enumeration walks Bell(|M|) partitions; keep |M| small enough
// that the walk stays in the hundred-thousand range.
inline constexpr int max_partition_ground = 10;

// Bell numbers by the Bell-triangle recurrence. Values fit in 64 bits for
// n <= 25.
inline std::uint64_t bell_number(int n) {
  if (n < 0 || n > 25) throw DomainError("bell_number: n out of range");
  if (n == 0) return 1;
  std::vector<std::uint64_t> row{1};
  for (int r = 1; r <= n; ++r) {
    std::vector<std::uint64_t> next;
    next.reserve(static_cast<std::size_t>(r) + 1);
    next.push_back(row.back());
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

// Enumerates all set partitions of M in restricted-growth-string order and
// invokes f(const SetPartition&) for each. The growth string runs over the
// members of M in ascending order; digit k assigns a member to block k.
template <class F>
inline void for_each_partition(IndexSet m, F&& f) {
  if (m.empty()) throw StructuralError("for_each_partition: empty set");
  if (m.size() > max_partition_ground) throw DomainError("for_each_partition: set too large");

  const std::vector<int> idx = m.members();
  const int k = static_cast<int>(idx.size());
  std::array<int, max_partition_ground> a{};    // growth string
  std::array<int, max_partition_ground> hi{};   // hi[j] = 1 + max(a[0..j-1])
  hi[0] = 1;
  for (int j = 1; j < k; ++j) hi[j] = 1;

  SetPartition part;
  part.blocks.reserve(static_cast<std::size_t>(k));
  for (;;) {
    part.blocks.clear();
    for (int j = 0; j < k; ++j) {
      const auto block = static_cast<std::size_t>(a[j]);
      if (block == part.blocks.size()) part.blocks.emplace_back();
      part.blocks[block] = part.blocks[block] | IndexSet::single(idx[j]);
    }
    f(static_cast<const SetPartition&>(part));

    // Advance to the next growth string: rightmost digit that may grow.
    int j = k - 1;
    while (j > 0 && a[j] >= hi[j]) {
      a[j] = 0;
      --j;
    }
    if (j == 0) break;
    ++a[j];
    const int top = a[j] >= hi[j] ? a[j] + 1 : hi[j];
    for (int t = j + 1; t < k; ++t) hi[t] = top;
  }
}

inline std::vector<SetPartition> enumerate_partitions(IndexSet m) {
  std::vector<SetPartition> out;
  for_each_partition(m, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

}  // namespace xstable
