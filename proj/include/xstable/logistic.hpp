#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/model.hpp"
#include "xstable/point.hpp"

namespace xstable {

namespace detail {

// alpha * (alpha - 1) * ... * (alpha - k + 1)
inline double falling_factorial(double alpha, int k) {
  double out = 1.0;
  for (int m = 0; m < k; ++m) out *= alpha - m;
  return out;
}

}  // namespace detail

// Symmetric logistic dependence: V^A(x) = (sum over A of x_i^(-1/alpha))^alpha
// with alpha in (0, 1]. alpha = 1 is full independence; smaller alpha means
// stronger dependence. The joint density is positive and continuous for the
// whole parameter range, so closed-form mixed partials are provided.
class LogisticModel {
 public:
  LogisticModel(int dimension, double alpha) : ground_(IndexSet::full(dimension)), alpha_(alpha) {
    if (dimension < 1) throw DomainError("LogisticModel: dimension must be positive");
    if (!(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0))
      throw DomainError("LogisticModel: alpha must lie in (0, 1]");
  }

  IndexSet ground() const { return ground_; }
  double alpha() const { return alpha_; }
  bool smooth_density() const { return true; }

  double exponent(IndexSet a, const EvaluationPoint& x) const {
    detail::check_subset_arg(a, ground_, "exponent");
    if (!a.subset_of(x.support())) throw StructuralError("exponent: point does not cover the set");
    return std::pow(radial_sum(a, x), alpha_);
  }

  // Mixed partial of V^A with respect to the coordinates in B. With
  // S = sum over A of x_i^(-1/alpha), iterating the chain rule on S^alpha
  // leaves a single falling-factorial term because S is additively
  // separable:
  //   ff(alpha, |B|) S^(alpha-|B|) prod_{j in B} (-(1/alpha) x_j^(-1/alpha-1))
  double mixed_partial(IndexSet a, IndexSet b, const EvaluationPoint& x) const {
    detail::check_subset_arg(a, ground_, "mixed_partial");
    detail::check_subset_arg(b, a, "mixed_partial");
    if (!a.subset_of(x.support()))
      throw StructuralError("mixed_partial: point does not cover the set");
    const int k = b.size();
    const double ff = detail::falling_factorial(alpha_, k);
    if (ff == 0.0) return 0.0;
    const double s = radial_sum(a, x);
    double prod = 1.0;
    for_each_member(b, [&](int j) {
      prod *= -(1.0 / alpha_) * std::pow(x[j], -1.0 / alpha_ - 1.0);
    });
    return ff * std::pow(s, alpha_ - k) * prod;
  }

 private:
  double radial_sum(IndexSet a, const EvaluationPoint& x) const {
    double s = 0.0;
    for_each_member(a, [&](int i) { s += std::pow(x[i], -1.0 / alpha_); });
    return s;
  }

  IndexSet ground_;
  double alpha_;
};

// Asymmetric logistic dependence: a max of independent logistic blocks,
//   V(x) = sum over terms t of (sum over i in B_t of (theta_{t,i}/x_i)^(1/alpha_t))^(alpha_t),
// where each coordinate's weights sum to one across the terms containing it.
// Every valid parameter choice yields a positive continuous density: each
// block's law is smooth, and coordinates can always be allocated to terms
// carrying positive weight. A constructor flag can override the smoothness
// advertisement if a caller wants to disable density-based operations.
class AsymmetricLogisticModel {
 public:
  struct Term {
    IndexSet subset;
    double alpha = 1.0;
    std::vector<double> weights;  // aligned with subset members, ascending
  };

  AsymmetricLogisticModel(int dimension, const std::vector<Term>& terms,
                          std::optional<bool> smooth_override = std::nullopt)
      : ground_(IndexSet::full(dimension)), smooth_(smooth_override.value_or(true)) {
    if (dimension < 1) throw DomainError("AsymmetricLogisticModel: dimension must be positive");
    if (terms.empty()) throw StructuralError("AsymmetricLogisticModel: no terms");
    std::vector<double> cover(static_cast<std::size_t>(dimension), 0.0);
    for (const Term& t : terms) {
      if (t.subset.empty() || !t.subset.subset_of(ground_))
        throw StructuralError("AsymmetricLogisticModel: term subset must be a non-empty subset of the ground set");
      if (!(std::isfinite(t.alpha) && t.alpha > 0.0 && t.alpha <= 1.0))
        throw DomainError("AsymmetricLogisticModel: term alpha must lie in (0, 1]");
      if (t.weights.size() != static_cast<std::size_t>(t.subset.size()))
        throw StructuralError("AsymmetricLogisticModel: weight count does not match term subset");
      for (const TermData& seen : terms_)
        if (seen.subset == t.subset)
          throw StructuralError("AsymmetricLogisticModel: duplicate term subset");
      TermData data;
      data.subset = t.subset;
      data.alpha = t.alpha;
      data.theta.fill(0.0);
      std::size_t pos = 0;
      for_each_member(t.subset, [&](int i) {
        const double w = t.weights[pos++];
        if (!(std::isfinite(w) && w >= 0.0))
          throw DomainError("AsymmetricLogisticModel: weights must be finite and non-negative");
        data.theta[static_cast<std::size_t>(i)] = w;
        cover[static_cast<std::size_t>(i)] += w;
      });
      terms_.push_back(data);
    }
    for (int i = 0; i < dimension; ++i)
      if (std::fabs(cover[static_cast<std::size_t>(i)] - 1.0) > 1e-12)
        throw ModelError("AsymmetricLogisticModel: weights for index " + std::to_string(i) +
                         " sum to " + std::to_string(cover[static_cast<std::size_t>(i)]) +
                         ", expected 1");
  }

  IndexSet ground() const { return ground_; }
  bool smooth_density() const { return smooth_; }

  double exponent(IndexSet a, const EvaluationPoint& x) const {
    detail::check_subset_arg(a, ground_, "exponent");
    if (!a.subset_of(x.support())) throw StructuralError("exponent: point does not cover the set");
    double v = 0.0;
    for (const TermData& t : terms_) {
      const IndexSet e = t.subset & a;
      if (e.empty()) continue;
      double s = 0.0;
      for_each_member(e, [&](int i) {
        const double th = t.theta[static_cast<std::size_t>(i)];
        if (th > 0.0) s += std::pow(th / x[i], 1.0 / t.alpha);
      });
      if (s > 0.0) v += std::pow(s, t.alpha);
    }
    return v;
  }

  // Sum of per-term falling-factorial derivatives over the terms whose
  // subset (cut to A) covers B. Terms with a zero weight anywhere on B
  // contribute nothing.
  double mixed_partial(IndexSet a, IndexSet b, const EvaluationPoint& x) const {
    detail::check_subset_arg(a, ground_, "mixed_partial");
    detail::check_subset_arg(b, a, "mixed_partial");
    if (!a.subset_of(x.support()))
      throw StructuralError("mixed_partial: point does not cover the set");
    const int k = b.size();
    double out = 0.0;
    for (const TermData& t : terms_) {
      const IndexSet e = t.subset & a;
      if (!b.subset_of(e)) continue;
      const double ff = detail::falling_factorial(t.alpha, k);
      if (ff == 0.0) continue;
      double prod = 1.0;
      for_each_member(b, [&](int j) {
        const double th = t.theta[static_cast<std::size_t>(j)];
        prod *= -(1.0 / t.alpha) * std::pow(th, 1.0 / t.alpha) *
                std::pow(x[j], -1.0 / t.alpha - 1.0);
      });
      if (prod == 0.0) continue;
      double s = 0.0;
      for_each_member(e, [&](int i) {
        const double th = t.theta[static_cast<std::size_t>(i)];
        if (th > 0.0) s += std::pow(th / x[i], 1.0 / t.alpha);
      });
      out += ff * std::pow(s, t.alpha - k) * prod;
    }
    return out;
  }

  std::size_t term_count() const { return terms_.size(); }

 private:
  struct TermData {
    IndexSet subset;
    double alpha = 1.0;
    std::array<double, IndexSet::max_size> theta{};
  };

  IndexSet ground_;
  bool smooth_;
  std::vector<TermData> terms_;
};

}  // namespace xstable
