#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"

namespace xstable {

// Strictly positive evaluation point supported on a subset of indices.
// Coordinates are supplied in ascending member order of the support.
class EvaluationPoint {
 public:
  EvaluationPoint(IndexSet support, const std::vector<double>& coords) : support_(support) {
    if (support.empty()) throw StructuralError("EvaluationPoint: empty support");
    if (coords.size() != static_cast<std::size_t>(support.size()))
      throw StructuralError("EvaluationPoint: coordinate count does not match support");
    std::size_t pos = 0;
    for_each_member(support, [&](int i) {
      const double v = coords[pos++];
      if (!(std::isfinite(v) && v > 0.0))
        throw DomainError("EvaluationPoint: coordinates must be finite and positive");
      x_[static_cast<std::size_t>(i)] = v;
    });
  }

  static EvaluationPoint all(IndexSet support, double value) {
    return EvaluationPoint(support, std::vector<double>(static_cast<std::size_t>(support.size()), value));
  }

  IndexSet support() const { return support_; }

  // Coordinate at index position i; i must belong to the support.
  double operator[](int i) const {
    if (!support_.contains(i)) throw StructuralError("EvaluationPoint: index outside support");
    return x_[static_cast<std::size_t>(i)];
  }

  // Coordinates in ascending member order.
  std::vector<double> coords() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(support_.size()));
    for_each_member(support_, [&](int i) { out.push_back(x_[static_cast<std::size_t>(i)]); });
    return out;
  }

  EvaluationPoint scaled(double t) const {
    if (!(std::isfinite(t) && t > 0.0)) throw DomainError("EvaluationPoint: scale must be positive");
    EvaluationPoint out(*this);
    for_each_member(support_, [&](int i) { out.x_[static_cast<std::size_t>(i)] *= t; });
    return out;
  }

  EvaluationPoint with(int i, double value) const {
    if (!support_.contains(i)) throw StructuralError("EvaluationPoint: index outside support");
    if (!(std::isfinite(value) && value > 0.0))
      throw DomainError("EvaluationPoint: coordinates must be finite and positive");
    EvaluationPoint out(*this);
    out.x_[static_cast<std::size_t>(i)] = value;
    return out;
  }

  // Restriction to a non-empty subset of the support.
  EvaluationPoint restricted(IndexSet sub) const {
    if (!sub.subset_of(support_)) throw StructuralError("EvaluationPoint: restriction outside support");
    EvaluationPoint out(*this);
    out.support_ = sub;
    if (sub.empty()) throw StructuralError("EvaluationPoint: empty support");
    return out;
  }

 private:
  IndexSet support_;
  std::array<double, IndexSet::max_size> x_{};
};

}  // namespace xstable
