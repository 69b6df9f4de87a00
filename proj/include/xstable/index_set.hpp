#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "xstable/errors.hpp"

namespace xstable {

// Subset of a ground index set {0,...,n-1}, stored as a bitmask.
// Ground sets are contiguous prefixes; subsets are arbitrary masks inside
// the ground. Index positions run from 0 to max_size-1.
class IndexSet {
 public:
  static constexpr int max_size = 20;

  constexpr IndexSet() = default;

  static constexpr IndexSet from_bits(std::uint32_t bits) { return IndexSet{bits}; }

  // {0,...,n-1}
  static IndexSet full(int n) {
    if (n < 0 || n > max_size) throw DomainError("IndexSet: ground size out of range");
    return IndexSet{n == 0 ? 0u : ((1u << n) - 1u)};
  }

  static IndexSet single(int i) {
    check_index(i);
    return IndexSet{1u << i};
  }

  static IndexSet of(std::initializer_list<int> members) {
    std::uint32_t b = 0;
    for (int i : members) {
      check_index(i);
      b |= 1u << i;
    }
    return IndexSet{b};
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }

  bool contains(int i) const { return i >= 0 && i < max_size && (bits_ >> i & 1u); }
  bool subset_of(IndexSet other) const { return (bits_ & ~other.bits_) == 0; }
  bool intersects(IndexSet other) const { return (bits_ & other.bits_) != 0; }
  bool disjoint_from(IndexSet other) const { return !intersects(other); }

  constexpr IndexSet operator|(IndexSet other) const { return IndexSet{bits_ | other.bits_}; }
  constexpr IndexSet operator&(IndexSet other) const { return IndexSet{bits_ & other.bits_}; }
  constexpr IndexSet minus(IndexSet other) const { return IndexSet{bits_ & ~other.bits_}; }

  IndexSet complement_in(IndexSet ground) const {
    if (!subset_of(ground)) throw StructuralError("IndexSet: complement of a non-subset");
    return IndexSet{ground.bits_ & ~bits_};
  }

  // Least member; set must be non-empty.
  int lowest() const {
    if (empty()) throw StructuralError("IndexSet: lowest() on empty set");
    return std::countr_zero(bits_);
  }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint32_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  friend constexpr bool operator==(IndexSet, IndexSet) = default;

 private:
  constexpr explicit IndexSet(std::uint32_t b) : bits_(b) {}
  static void check_index(int i) {
    if (i < 0 || i >= max_size) throw DomainError("IndexSet: index out of range");
  }

  std::uint32_t bits_ = 0;
};

// Visits each member in ascending order without allocating.
template <class F>
inline void for_each_member(IndexSet s, F&& f) {
  for (std::uint32_t b = s.bits(); b; b &= b - 1) f(std::countr_zero(b));
}

// Canonical subset order: by cardinality, ties broken lexicographically on the
// ascending member sequence. For equal cardinalities the lexicographically
// smaller set is the one containing the least element of the symmetric
// difference.
inline bool canonical_less(IndexSet a, IndexSet b) {
  const int ca = a.size();
  const int cb = b.size();
  if (ca != cb) return ca < cb;
  const std::uint32_t d = a.bits() ^ b.bits();
  if (d == 0) return false;
  return (a.bits() >> std::countr_zero(d)) & 1u;
}

// All non-empty subsets of `ground` in canonical order.
inline std::vector<IndexSet> enumerate_subsets(IndexSet ground) {
  const std::uint32_t g = ground.bits();
  std::vector<IndexSet> out;
  out.reserve((std::size_t{1} << ground.size()) - 1);
  // Enumerate non-empty sub-masks of g: classic descending mask walk, then sort.
  for (std::uint32_t sub = g;; sub = (sub - 1) & g) {
    if (sub != 0) out.push_back(IndexSet::from_bits(sub));
    if (sub == 0) break;
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

// "{1,4}" style rendering for diagnostics and error messages.
inline std::string to_string(IndexSet s) {
  std::string out = "{";
  bool first = true;
  for_each_member(s, [&](int i) {
    if (!first) out += ',';
    out += std::to_string(i);
    first = false;
  });
  out += '}';
  return out;
}

}  // namespace xstable
