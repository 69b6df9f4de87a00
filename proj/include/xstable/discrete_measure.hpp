#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/lattice.hpp"
#include "xstable/model.hpp"
#include "xstable/point.hpp"

namespace xstable {

// Finitely supported angular measure: a list of weighted directions on the
// non-negative orthant. Standard margins require the weighted coordinate
// sums to equal one in every component; construction validates structure,
// check_moments reports the sums.
class DiscreteSpectralMeasure {
 public:
  struct Atom {
    double weight = 0.0;
    std::vector<double> direction;
  };

  DiscreteSpectralMeasure(int dimension, std::vector<Atom> atoms, bool smooth_density = false)
      : ground_(IndexSet::full(check_dimension(dimension))),
        atoms_(std::move(atoms)),
        smooth_(smooth_density) {
    if (atoms_.empty()) throw StructuralError("DiscreteSpectralMeasure: no atoms");
    for (const Atom& a : atoms_) {
      if (!(std::isfinite(a.weight) && a.weight > 0.0))
        throw DomainError("DiscreteSpectralMeasure: atom weights must be finite and positive");
      if (a.direction.size() != static_cast<std::size_t>(dimension))
        throw StructuralError("DiscreteSpectralMeasure: direction length does not match dimension");
      bool any = false;
      for (double c : a.direction) {
        if (!(std::isfinite(c) && c >= 0.0))
          throw DomainError("DiscreteSpectralMeasure: direction components must be finite and non-negative");
        any = any || c > 0.0;
      }
      if (!any) throw DomainError("DiscreteSpectralMeasure: atom direction is identically zero");
    }
  }

  int dimension() const { return ground_.size(); }
  IndexSet ground() const { return ground_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // A finitely supported angular measure never yields a continuous joint
  // density; the flag stays false unless a caller overrides it knowingly.
  bool smooth_density() const { return smooth_; }

  double exponent(IndexSet a, const EvaluationPoint& x) const {
    detail::check_subset_arg(a, ground_, "exponent");
    if (!a.subset_of(x.support())) throw StructuralError("exponent: point does not cover the set");
    double v = 0.0;
    for (const Atom& atom : atoms_) {
      double best = 0.0;
      for_each_member(a, [&](int i) {
        const double r = atom.direction[static_cast<std::size_t>(i)] / x[i];
        if (r > best) best = r;
      });
      v += atom.weight * best;
    }
    return v;
  }

  // Exact independence certificate from atom supports: the subvectors on A
  // and B are independent iff no atom charges both groups.
  std::optional<bool> certify_pair_independence(IndexSet a, IndexSet b) const {
    detail::check_subset_arg(a, ground_, "certify_pair_independence");
    detail::check_subset_arg(b, ground_, "certify_pair_independence");
    if (a.intersects(b)) throw StructuralError("certify_pair_independence: sets overlap");
    for (const Atom& atom : atoms_) {
      bool hitsA = false;
      bool hitsB = false;
      for_each_member(a, [&](int i) { hitsA = hitsA || atom.direction[static_cast<std::size_t>(i)] > 0.0; });
      for_each_member(b, [&](int i) { hitsB = hitsB || atom.direction[static_cast<std::size_t>(i)] > 0.0; });
      if (hitsA && hitsB) return false;
    }
    return true;
  }

 private:
  static int check_dimension(int d) {
    if (d < 1 || d > IndexSet::max_size)
      throw DomainError("DiscreteSpectralMeasure: dimension out of range");
    return d;
  }

  IndexSet ground_;
  std::vector<Atom> atoms_;
  bool smooth_;
};

struct MomentReport {
  std::vector<double> column_sums;
  double tolerance = 0.0;
  bool pass = false;
  double max_residual = 0.0;
};

// Weighted coordinate sums against the standard-margin target of one.
inline MomentReport check_moments(const DiscreteSpectralMeasure& m, double tol = 1e-12) {
  MomentReport rep;
  rep.tolerance = tol;
  rep.column_sums.assign(static_cast<std::size_t>(m.dimension()), 0.0);
  for (const auto& atom : m.atoms())
    for (int i = 0; i < m.dimension(); ++i)
      rep.column_sums[static_cast<std::size_t>(i)] += atom.weight * atom.direction[static_cast<std::size_t>(i)];
  for (double s : rep.column_sums) rep.max_residual = std::max(rep.max_residual, std::fabs(s - 1.0));
  rep.pass = rep.max_residual <= tol;
  return rep;
}

// Rescales each coordinate so the moment sums are exactly one. A coordinate
// with zero total mass cannot be rescaled.
inline DiscreteSpectralMeasure renormalized(const DiscreteSpectralMeasure& m) {
  const MomentReport rep = check_moments(m);
  std::vector<DiscreteSpectralMeasure::Atom> atoms = m.atoms();
  for (int i = 0; i < m.dimension(); ++i) {
    const double s = rep.column_sums[static_cast<std::size_t>(i)];
    if (!(s > 0.0)) throw DomainError("renormalized: degenerate margin, no mass on a coordinate");
    for (auto& atom : atoms) atom.direction[static_cast<std::size_t>(i)] /= s;
  }
  return DiscreteSpectralMeasure(m.dimension(), std::move(atoms), m.smooth_density());
}

// Max-linear model: component i is the largest of c_{k,i} Z_k over rows k,
// with independent standard Frechet factors Z_k. Rows give atoms; columns
// must each carry positive mass, and sum to one unless renormalize is set.
inline DiscreteSpectralMeasure max_linear_measure(int dimension,
                                                  const std::vector<std::vector<double>>& coefficients,
                                                  bool renormalize = false) {
  if (coefficients.empty()) throw StructuralError("max_linear_measure: no coefficient rows");
  std::vector<DiscreteSpectralMeasure::Atom> atoms;
  for (const auto& row : coefficients) {
    if (row.size() != static_cast<std::size_t>(dimension))
      throw StructuralError("max_linear_measure: row length does not match dimension");
    bool any = false;
    for (double c : row) {
      if (!(std::isfinite(c) && c >= 0.0))
        throw DomainError("max_linear_measure: coefficients must be finite and non-negative");
      any = any || c > 0.0;
    }
    if (any) atoms.push_back({1.0, row});
  }
  if (atoms.empty()) throw StructuralError("max_linear_measure: all rows are zero");
  for (int i = 0; i < dimension; ++i) {
    double s = 0.0;
    for (const auto& atom : atoms) s += atom.direction[static_cast<std::size_t>(i)];
    if (!(s > 0.0)) throw DomainError("max_linear_measure: degenerate margin, column " +
                                      std::to_string(i) + " is identically zero");
  }
  DiscreteSpectralMeasure out(dimension, std::move(atoms));
  if (renormalize) return renormalized(out);
  const MomentReport rep = check_moments(out);
  if (!rep.pass)
    throw ModelError("max_linear_measure: column sums deviate from one; pass renormalize=true "
                     "or fix the coefficients");
  return out;
}

// Fully independent standard-margin model: one unit atom per coordinate axis.
inline DiscreteSpectralMeasure independence_measure(int dimension) {
  std::vector<DiscreteSpectralMeasure::Atom> atoms;
  for (int i = 0; i < dimension; ++i) {
    std::vector<double> dir(static_cast<std::size_t>(dimension), 0.0);
    dir[static_cast<std::size_t>(i)] = 1.0;
    atoms.push_back({1.0, std::move(dir)});
  }
  return DiscreteSpectralMeasure(dimension, std::move(atoms));
}

// Exact spectral sums for the whole lattice: for each atom with rescaled
// coordinates a_i = w_i / x_i,
//   d_A   adds weight * (min over A of a_i - max over A^c of a_j)_+,
//   chi_A adds weight * (min over A of a_i),
// with the max over an empty complement read as zero.
inline std::pair<LatticeTable, LatticeTable> spectral_tables(const DiscreteSpectralMeasure& m,
                                                             const EvaluationPoint& x) {
  const IndexSet ground = m.ground();
  if (!ground.subset_of(x.support()))
    throw StructuralError("spectral_tables: point does not cover the ground set");
  LatticeTable d(ground, TableKind::mobius);
  LatticeTable chi(ground, TableKind::chi);
  const std::uint32_t g = ground.bits();
  std::array<double, IndexSet::max_size> a{};
  for (std::uint32_t mask = 1; mask <= g; ++mask) {
    double dv = 0.0;
    double cv = 0.0;
    for (const auto& atom : m.atoms()) {
      for_each_member(ground, [&](int i) {
        a[static_cast<std::size_t>(i)] = atom.direction[static_cast<std::size_t>(i)] / x[i];
      });
      double mn = std::numeric_limits<double>::infinity();
      double mx = 0.0;
      for_each_member(ground, [&](int i) {
        const double v = a[static_cast<std::size_t>(i)];
        if (mask >> i & 1u) {
          if (v < mn) mn = v;
        } else if (v > mx) {
          mx = v;
        }
      });
      cv += atom.weight * mn;
      if (mn > mx) dv += atom.weight * (mn - mx);
    }
    d.set(IndexSet::from_bits(mask), dv);
    chi.set(IndexSet::from_bits(mask), cv);
  }
  return {std::move(d), std::move(chi)};
}

struct PairCoefficients {
  double d = 0.0;
  double chi = 0.0;
};

// Exact spectral sums for a disjoint pair (A, B) with C the rest of the
// ground set: with a_i = w_i / x_i and M_S = max over S of a_i,
//   d adds weight * (min(M_A, M_B) - M_C)_+ and chi drops the M_C term.
inline PairCoefficients spectral_pair(const DiscreteSpectralMeasure& m, IndexSet a_set, IndexSet b_set,
                                      const EvaluationPoint& x) {
  const IndexSet ground = m.ground();
  detail::check_subset_arg(a_set, ground, "spectral_pair");
  detail::check_subset_arg(b_set, ground, "spectral_pair");
  if (a_set.intersects(b_set)) throw StructuralError("spectral_pair: sets overlap");
  if (!ground.subset_of(x.support()))
    throw StructuralError("spectral_pair: point does not cover the ground set");
  PairCoefficients out;
  for (const auto& atom : m.atoms()) {
    double ma = 0.0, mb = 0.0, mc = 0.0;
    for_each_member(ground, [&](int i) {
      const double v = atom.direction[static_cast<std::size_t>(i)] / x[i];
      if (a_set.contains(i)) {
        if (v > ma) ma = v;
      } else if (b_set.contains(i)) {
        if (v > mb) mb = v;
      } else if (v > mc) {
        mc = v;
      }
    });
    const double inner = std::min(ma, mb);
    out.chi += atom.weight * inner;
    if (inner > mc) out.d += atom.weight * (inner - mc);
  }
  return out;
}

}  // namespace xstable
