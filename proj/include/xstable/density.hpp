#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "xstable/diagnostics.hpp"
#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/model.hpp"
#include "xstable/partition.hpp"
#include "xstable/point.hpp"

namespace xstable {

enum class DerivativeMethod {
  exact_if_available,  // closed form when the model has one, else differences
  finite_difference,   // force the difference stencil (cross-validation)
};

namespace detail {

// Snaps h so that x + h and x - h are exactly representable offsets of x;
// keeps the stencil symmetric at the bit level.
inline double representable_step(double x, double h) {
  volatile double bumped = x + h;
  return bumped - x;
}

inline constexpr int max_fd_order = 6;
inline constexpr double min_fd_coordinate = 1e-3;

// Iterated central difference over the coordinates in B with one step of
// Richardson extrapolation. Step sizes follow the usual balance between
// truncation and cancellation for an order-k mixed difference,
// h_j ~ x_j * eps^(1/(k+2)).
template <exponent_model M>
double fd_stencil(const M& model, IndexSet a, IndexSet b, const EvaluationPoint& x,
                  double shrink) {
  const std::vector<int> coords = b.members();
  const int k = static_cast<int>(coords.size());
  const double eps = std::numeric_limits<double>::epsilon();
  const double rel = std::pow(eps, 1.0 / (k + 2)) * shrink;
  std::array<double, IndexSet::max_size> h{};
  double denom = 1.0;
  for (int j : coords) {
    h[static_cast<std::size_t>(j)] = representable_step(x[j], x[j] * rel);
    denom *= 2.0 * h[static_cast<std::size_t>(j)];
  }
  double sum = 0.0;
  for (unsigned s = 0; s < (1u << k); ++s) {
    EvaluationPoint p = x;
    int negatives = 0;
    for (int t = 0; t < k; ++t) {
      const int j = coords[static_cast<std::size_t>(t)];
      const double hj = h[static_cast<std::size_t>(j)];
      if (s >> t & 1u) {
        p = p.with(j, x[j] + hj);
      } else {
        p = p.with(j, x[j] - hj);
        ++negatives;
      }
    }
    const double term = model.exponent(a, p);
    sum += (negatives & 1) ? -term : term;
  }
  return sum / denom;
}

}  // namespace detail

// Mixed partial of V^A with respect to the coordinates in B (non-empty,
// inside A). Uses the model's closed form when present, otherwise central
// differences with one Richardson step. The difference path needs a smooth
// model, |B| <= 6, and stencil coordinates at least 1e-3 so the steps stay
// well scaled.
template <exponent_model M>
double mixed_partial(const M& model, IndexSet a, IndexSet b, const EvaluationPoint& x,
                     DerivativeMethod method = DerivativeMethod::exact_if_available) {
  detail::check_subset_arg(a, model.ground(), "mixed_partial");
  detail::check_subset_arg(b, a, "mixed_partial");
  if (!a.subset_of(x.support()))
    throw StructuralError("mixed_partial: point does not cover the set");

  if constexpr (has_exact_mixed_partial<M>) {
    if (method == DerivativeMethod::exact_if_available) return model.mixed_partial(a, b, x);
  }
  if (!model.smooth_density())
    throw ModelError("mixed_partial: non-smooth model without exact derivatives");
  if (b.size() > detail::max_fd_order)
    throw DomainError("mixed_partial: difference stencil limited to order 6");
  bool too_small = false;
  for_each_member(b, [&](int j) { too_small = too_small || x[j] < detail::min_fd_coordinate; });
  if (too_small)
    throw DomainError("mixed_partial: stencil coordinates must be at least 1e-3");
  const double coarse = detail::fd_stencil(model, a, b, x, 1.0);
  const double fine = detail::fd_stencil(model, a, b, x, 0.5);
  return (4.0 * fine - coarse) / 3.0;
}

struct PartitionSum {
  double value = 1.0;
  std::uint64_t partition_count = 0;
};

// W^N_M: sum over set partitions of M of (-1)^(number of blocks) times the
// product of block derivatives of V^N. The empty M gives the empty product,
// one. Block derivatives are memoized across partitions.
template <exponent_model M>
PartitionSum partition_sum(const M& model, IndexSet n_set, IndexSet m_set,
                           const EvaluationPoint& x,
                           DerivativeMethod method = DerivativeMethod::exact_if_available) {
  detail::check_subset_arg(n_set, model.ground(), "partition_sum");
  if (!n_set.subset_of(x.support()))
    throw StructuralError("partition_sum: point does not cover the set");
  if (m_set.empty()) return {1.0, 0};
  if (!m_set.subset_of(n_set))
    throw StructuralError("partition_sum: derivative set must lie inside the margin set");
  if (m_set.size() > max_partition_ground)
    throw DomainError("partition_sum: derivative set too large");

  const std::vector<int> members = m_set.members();
  const int k = static_cast<int>(members.size());
  std::vector<double> cache(std::size_t{1} << k, std::numeric_limits<double>::quiet_NaN());
  const auto block_value = [&](IndexSet block) {
    std::uint32_t local = 0;
    for (int t = 0; t < k; ++t)
      if (block.contains(members[static_cast<std::size_t>(t)])) local |= 1u << t;
    double& slot = cache[local];
    if (std::isnan(slot)) slot = mixed_partial(model, n_set, block, x, method);
    return slot;
  };

  PartitionSum out;
  out.value = 0.0;
  for_each_partition(m_set, [&](const SetPartition& part) {
    double prod = 1.0;
    for (IndexSet block : part.blocks) prod *= block_value(block);
    out.value += (part.blocks.size() & 1) ? -prod : prod;
    ++out.partition_count;
  });
  return out;
}

// Joint density of the margin on A: W^A_A(x) exp(-V^A(x)). Only meaningful
// for models advertising a positive continuous density.
template <exponent_model M>
double density(const M& model, IndexSet a, const EvaluationPoint& x,
               DerivativeMethod method = DerivativeMethod::exact_if_available) {
  if (!model.smooth_density()) throw ModelError("density: non-smooth model");
  const PartitionSum w = partition_sum(model, a, a, x, method);
  const double v = model.exponent(a, x);
  const double g = w.value * std::exp(-v);
  if (!(g > 0.0))
    throw ModelError("density: non-positive value; smooth_density advertisement is inconsistent");
  return g;
}

// P(X_A <= x_A | X_B = x_B) = exp(-(V^{A u B} - V^B)) W^{A u B}_B / W^B_B.
template <exponent_model M>
double conditional_cdf(const M& model, IndexSet a, IndexSet b, const EvaluationPoint& x,
                       DerivativeMethod method = DerivativeMethod::exact_if_available) {
  if (!model.smooth_density()) throw ModelError("conditional_cdf: non-smooth model");
  detail::check_disjoint_pair(a, b, model.ground(), "conditional_cdf");
  const PartitionSum den = partition_sum(model, b, b, x, method);
  if (!(den.value > 0.0))
    throw ModelError("conditional_cdf: conditioning density vanished");
  const PartitionSum num = partition_sum(model, a | b, b, x, method);
  if (num.value < 0.0)
    throw ModelError("conditional_cdf: negative partition sum; model inconsistency");
  const double vab = model.exponent(a | b, x);
  const double vb = model.exponent(b, x);
  const double value = std::exp(-(vab - vb)) * num.value / den.value;
  return std::min(value, 1.0);
}

inline std::vector<double> default_growth_times() { return {1, 2, 4, 8, 16, 32, 64, 128, 256}; }

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("fit_line: need two points");
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_line: degenerate abscissae");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  const double ss_res = std::max(0.0, syy - out.slope * sxy);
  out.r2 = syy > 1e-300 ? 1.0 - ss_res / syy : 1.0;
  return out;
}

// Scaling comparison behind the conditional-independence exclusion for
// smooth models. Along the ray x/t the gap d_{A,B}(x/t) = t d_{A,B}(x)
// grows linearly, so exp(gap) grows exponentially whenever d_{A,B}(x) > 0.
// If the A and B margins were conditionally independent given C, exp(gap)
// would equal the ratio
//   R(t) = W^{A u C}_C W^{B u C}_C / (W^{A u B u C}_C W^C_C)
// evaluated at x/t, which is a ratio of polynomials in t and stays
// polynomially bounded. An exponential fit of the gap with a bounded
// log-log slope of R certifies the mismatch.
struct GrowthProbe {
  std::vector<double> t_values;
  std::vector<double> gap;    // d_{A,B}(x/t)
  std::vector<double> ratio;  // R(t)
  double gap_at_one = 0.0;    // d_{A,B}(x)
  double rate = 0.0;          // slope of gap against t
  double rate_r2 = 0.0;
  double ratio_loglog_slope = 0.0;
  bool exponential_gap = false;
  bool ci_excluded = false;
};

template <exponent_model M>
GrowthProbe growth_probe(const M& model, IndexSet a, IndexSet b, const EvaluationPoint& x,
                         std::vector<double> t_values = default_growth_times(),
                         DerivativeMethod method = DerivativeMethod::exact_if_available) {
  if (!model.smooth_density()) throw ModelError("growth_probe: non-smooth model");
  const IndexSet ground = model.ground();
  detail::check_disjoint_pair(a, b, ground, "growth_probe");
  if (t_values.size() < 2) throw DomainError("growth_probe: need at least two scales");
  for (double t : t_values)
    if (!(std::isfinite(t) && t > 0.0)) throw DomainError("growth_probe: scales must be positive");

  const IndexSet c = (a | b).complement_in(ground);
  GrowthProbe out;
  out.t_values = t_values;
  out.gap_at_one = pair_d(model, a, b, x);
  std::vector<double> log_t, log_ratio;
  for (double t : t_values) {
    const EvaluationPoint xt = x.scaled(1.0 / t);
    out.gap.push_back(pair_d(model, a, b, xt));
    double r = 1.0;
    if (!c.empty()) {
      const double wac = partition_sum(model, a | c, c, xt, method).value;
      const double wbc = partition_sum(model, b | c, c, xt, method).value;
      const double wabc = partition_sum(model, ground, c, xt, method).value;
      const double wc = partition_sum(model, c, c, xt, method).value;
      if (!(wac > 0.0 && wbc > 0.0 && wabc > 0.0 && wc > 0.0))
        throw ModelError("growth_probe: non-positive partition sum; model inconsistency");
      r = (wac * wbc) / (wabc * wc);
    }
    out.ratio.push_back(r);
    log_t.push_back(std::log(t));
    log_ratio.push_back(std::log(r));
  }
  const LineFit gap_fit = fit_line(t_values, out.gap);
  out.rate = gap_fit.slope;
  out.rate_r2 = gap_fit.r2;
  out.ratio_loglog_slope = fit_line(log_t, log_ratio).slope;
  out.exponential_gap = out.rate_r2 >= 0.999 && out.rate > 1e-6;
  out.ci_excluded = out.exponential_gap;
  return out;
}

}  // namespace xstable
