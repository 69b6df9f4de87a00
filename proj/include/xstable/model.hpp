#pragma once

#include <cmath>
#include <concepts>
#include <optional>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/lattice.hpp"
#include "xstable/point.hpp"

namespace xstable {

// A dependence model exposes the exponent V^A(x_A) of every non-empty
// subvector A of its ground set, together with a flag stating whether the
// joint law has a positive continuous density. Margins are standardised:
// V^{i}(x) = 1/x for every index i.
template <class M>
concept exponent_model = requires(const M& m, IndexSet a, const EvaluationPoint& x) {
  { m.ground() } -> std::convertible_to<IndexSet>;
  { m.exponent(a, x) } -> std::convertible_to<double>;
  { m.smooth_density() } -> std::convertible_to<bool>;
};

// Optional capability: closed-form mixed partials of V^A with respect to the
// coordinates in B (B inside A).
template <class M>
concept has_exact_mixed_partial =
    exponent_model<M> && requires(const M& m, IndexSet a, IndexSet b, const EvaluationPoint& x) {
      { m.mixed_partial(a, b, x) } -> std::convertible_to<double>;
    };

// Optional capability: an exact structural certificate that the subvectors
// on A and B are independent (true), dependent (false), or undecided
// (nullopt).
template <class M>
concept has_independence_certificate =
    exponent_model<M> && requires(const M& m, IndexSet a, IndexSet b) {
      { m.certify_pair_independence(a, b) } -> std::convertible_to<std::optional<bool>>;
    };

namespace detail {

inline void check_subset_arg(IndexSet a, IndexSet ground, const char* op) {
  if (a.empty()) throw StructuralError(std::string(op) + ": empty index set");
  if (!a.subset_of(ground)) throw StructuralError(std::string(op) + ": set outside ground set");
}

inline void check_disjoint_pair(IndexSet a, IndexSet b, IndexSet ground, const char* op) {
  check_subset_arg(a, ground, op);
  check_subset_arg(b, ground, op);
  if (a.intersects(b)) throw StructuralError(std::string(op) + ": sets overlap");
}

}  // namespace detail

// Evaluates V^A at x for every non-empty subset A of the ground set.
// The point must cover the whole ground set.
template <exponent_model M>
LatticeTable exponent_table(const M& model, const EvaluationPoint& x) {
  const IndexSet ground = model.ground();
  if (!ground.subset_of(x.support()))
    throw StructuralError("exponent_table: point does not cover the ground set");
  LatticeTable out(ground, TableKind::exponent);
  const std::uint32_t g = ground.bits();
  for (std::uint32_t m = 1; m <= g; ++m) {
    const IndexSet a = IndexSet::from_bits(m);
    out.set(a, model.exponent(a, x));
  }
  return out;
}

// Consistency probe for model implementations: standard margins, degree -1
// homogeneity, and monotonicity of V^A under enlarging A.
struct ProbeReport {
  double max_margin_residual = 0.0;
  double max_homogeneity_residual = 0.0;
  double max_monotonicity_violation = 0.0;

  bool pass(double tol = 1e-9) const {
    return max_margin_residual <= tol && max_homogeneity_residual <= tol &&
           max_monotonicity_violation <= tol;
  }
};

template <exponent_model M>
ProbeReport probe_model(const M& model, const std::vector<EvaluationPoint>& points) {
  const IndexSet ground = model.ground();
  ProbeReport rep;
  for (const EvaluationPoint& x : points) {
    if (!ground.subset_of(x.support()))
      throw StructuralError("probe_model: point does not cover the ground set");
    for_each_member(ground, [&](int i) {
      const IndexSet a = IndexSet::single(i);
      const double r = std::fabs(model.exponent(a, x) - 1.0 / x[i]);
      rep.max_margin_residual = std::max(rep.max_margin_residual, r);
    });
    const LatticeTable table = exponent_table(model, x);
    for (const double t : {0.1, 1.0, 7.3}) {
      const EvaluationPoint xt = x.scaled(t);
      const std::uint32_t g = ground.bits();
      for (std::uint32_t m = 1; m <= g; ++m) {
        const IndexSet a = IndexSet::from_bits(m);
        const double v = table.at(a);
        const double r = std::fabs(t * model.exponent(a, xt) - v) / (1.0 + std::fabs(v));
        rep.max_homogeneity_residual = std::max(rep.max_homogeneity_residual, r);
      }
    }
    // V^A never decreases when A grows by one element.
    const std::uint32_t g = ground.bits();
    for (std::uint32_t m = 1; m <= g; ++m) {
      const IndexSet a = IndexSet::from_bits(m);
      const double va = table.at(a);
      for_each_member(ground.minus(a), [&](int i) {
        const double grown = table.at(a | IndexSet::single(i));
        rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, va - grown);
      });
    }
  }
  return rep;
}

template <exponent_model M>
ProbeReport probe_model(const M& model) {
  const IndexSet ground = model.ground();
  const int n = ground.size();
  std::vector<EvaluationPoint> pts;
  pts.push_back(EvaluationPoint::all(ground, 1.0));
  std::vector<double> ramp, mixed;
  for (int i = 0; i < n; ++i) {
    ramp.push_back(0.5 + 0.25 * i);
    mixed.push_back(i % 2 ? 3.0 : 0.75);
  }
  pts.emplace_back(ground, ramp);
  pts.emplace_back(ground, mixed);
  return probe_model(model, pts);
}

}  // namespace xstable
