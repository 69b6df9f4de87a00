#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"

namespace xstable {

// Which family of coefficients a table holds, indexed by non-empty subsets
// of the ground set:
//   exponent  V^A, the stable tail dependence rates of subvector maxima
//   mobius    d_A, the inclusion-exclusion weights of the exponent lattice
//   chi       chi_A, the upper limits of d_A as coordinates off A diverge
enum class TableKind { exponent, mobius, chi };

inline const char* to_string(TableKind k) {
  switch (k) {
    case TableKind::exponent: return "exponent";
    case TableKind::mobius: return "mobius";
    case TableKind::chi: return "chi";
  }
  return "?";
}

// Dense table of one coefficient family over all non-empty subsets of a
// contiguous ground set {0,...,n-1}. Entries start unset (NaN); transforms
// require a complete table.
class LatticeTable {
 public:
  LatticeTable(IndexSet ground, TableKind kind)
      : ground_(ground),
        kind_(kind),
        v_(std::size_t{1} << check_ground(ground), std::numeric_limits<double>::quiet_NaN()) {
    v_[0] = 0.0;
  }

  IndexSet ground() const { return ground_; }
  int ground_size() const { return ground_.size(); }
  TableKind kind() const { return kind_; }
  std::size_t entry_count() const { return v_.size() - 1; }

  double at(IndexSet subset) const {
    check_subset(subset);
    return v_[subset.bits()];
  }

  void set(IndexSet subset, double value) {
    check_subset(subset);
    if (!std::isfinite(value)) throw DomainError("LatticeTable: entries must be finite");
    v_[subset.bits()] = value;
  }

  bool complete() const {
    for (std::size_t m = 1; m < v_.size(); ++m)
      if (!std::isfinite(v_[m])) return false;
    return true;
  }

  double max_abs() const {
    double out = 0.0;
    for (std::size_t m = 1; m < v_.size(); ++m) {
      const double a = std::fabs(v_[m]);
      if (a > out) out = a;
    }
    return out;
  }

  // Entries at or below this magnitude count as zero for verdicts read off
  // the table.
  double zero_tolerance() const { return 1e-9 * (1.0 + max_abs()); }

  // Raw storage indexed by subset bitmask; slot 0 is fixed at zero.
  const std::vector<double>& values() const { return v_; }

 private:
  static int check_ground(IndexSet g) {
    if (g.empty()) throw StructuralError("LatticeTable: empty ground set");
    if (g != IndexSet::full(g.size()))
      throw StructuralError("LatticeTable: ground set must be contiguous from 0");
    return g.size();
  }

  void check_subset(IndexSet s) const {
    if (s.empty()) throw StructuralError("LatticeTable: empty subset");
    if (!s.subset_of(ground_)) throw StructuralError("LatticeTable: subset outside ground set");
  }

  IndexSet ground_;
  TableKind kind_;
  std::vector<double> v_;
};

namespace detail {

// In-place butterfly transforms over subset lattices, O(n 2^n) each.

inline void subset_zeta(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < a.size(); ++m)
      if (m & bit) a[m] += a[m ^ bit];
  }
}

inline void subset_mobius(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < a.size(); ++m)
      if (m & bit) a[m] -= a[m ^ bit];
  }
}

inline void superset_zeta(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < a.size(); ++m)
      if (!(m & bit)) a[m] += a[m | bit];
  }
}

inline void superset_mobius(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < a.size(); ++m)
      if (!(m & bit)) a[m] -= a[m | bit];
  }
}

inline const std::vector<double>& checked_values(const LatticeTable& t, TableKind expect,
                                                 const char* op) {
  if (t.kind() != expect)
    throw StructuralError(std::string(op) + ": expected a " + to_string(expect) + " table, got " +
                          to_string(t.kind()));
  if (!t.complete()) throw StructuralError(std::string(op) + ": table has missing entries");
  return t.values();
}

inline LatticeTable from_values(IndexSet ground, TableKind kind, std::vector<double> vals) {
  LatticeTable out(ground, kind);
  const std::uint32_t g = ground.bits();
  for (std::uint32_t m = 1; m <= g; ++m)
    if ((m & ~g) == 0) out.set(IndexSet::from_bits(m), vals[m]);
  return out;
}

// Multiplies each non-empty entry by (-1)^{|A|+1}; used by the involutive
// alternating-sum identity linking exponent and chi tables.
inline std::vector<double> sign_prescaled(const std::vector<double>& in) {
  std::vector<double> a(in.size(), 0.0);
  for (std::size_t m = 1; m < in.size(); ++m) {
    const int c = std::popcount(m);
    a[m] = (c & 1) ? in[m] : -in[m];
  }
  return a;
}

}  // namespace detail

// d_A = sum over supersets B of the complement of A, with alternating signs
// on B's overlap with A. Computed as a signed superset transform read at A^c.
inline LatticeTable mobius_from_exponent(const LatticeTable& t) {
  const int n = t.ground_size();
  std::vector<double> a = detail::checked_values(t, TableKind::exponent, "mobius_from_exponent");
  detail::superset_mobius(a, n);
  const std::uint32_t g = t.ground().bits();
  std::vector<double> d(a.size(), 0.0);
  for (std::uint32_t m = 1; m <= g; ++m)
    if ((m & ~g) == 0) d[m] = -a[(~m) & g];
  return detail::from_values(t.ground(), TableKind::mobius, std::move(d));
}

// V^A = sum of d_B over subsets B meeting A; the complement carries the
// subsets missing A, so V^A is the total mass minus a subset-sum at A^c.
inline LatticeTable exponent_from_mobius(const LatticeTable& t) {
  const int n = t.ground_size();
  std::vector<double> a = detail::checked_values(t, TableKind::mobius, "exponent_from_mobius");
  detail::subset_zeta(a, n);
  const std::uint32_t g = t.ground().bits();
  const double total = a[g];
  std::vector<double> v(a.size(), 0.0);
  for (std::uint32_t m = 1; m <= g; ++m)
    if ((m & ~g) == 0) v[m] = total - a[(~m) & g];
  return detail::from_values(t.ground(), TableKind::exponent, std::move(v));
}

// chi_A = sum of d_B over supersets B of A.
inline LatticeTable chi_from_mobius(const LatticeTable& t) {
  const int n = t.ground_size();
  std::vector<double> a = detail::checked_values(t, TableKind::mobius, "chi_from_mobius");
  detail::superset_zeta(a, n);
  return detail::from_values(t.ground(), TableKind::chi, std::move(a));
}

// d_A = alternating superset sum of chi.
inline LatticeTable mobius_from_chi(const LatticeTable& t) {
  const int n = t.ground_size();
  std::vector<double> a = detail::checked_values(t, TableKind::chi, "mobius_from_chi");
  detail::superset_mobius(a, n);
  return detail::from_values(t.ground(), TableKind::mobius, std::move(a));
}

// chi_A = sum over non-empty B inside A of (-1)^{|B|+1} V^B. The same
// alternating form maps chi back to V, so these two transforms mirror each
// other exactly.
inline LatticeTable chi_from_exponent(const LatticeTable& t) {
  const int n = t.ground_size();
  std::vector<double> a =
      detail::sign_prescaled(detail::checked_values(t, TableKind::exponent, "chi_from_exponent"));
  detail::subset_zeta(a, n);
  return detail::from_values(t.ground(), TableKind::chi, std::move(a));
}

inline LatticeTable exponent_from_chi(const LatticeTable& t) {
  const int n = t.ground_size();
  std::vector<double> a =
      detail::sign_prescaled(detail::checked_values(t, TableKind::chi, "exponent_from_chi"));
  detail::subset_zeta(a, n);
  return detail::from_values(t.ground(), TableKind::exponent, std::move(a));
}

}  // namespace xstable
