#pragma once

#include <algorithm>
#include <utility>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/lattice.hpp"
#include "xstable/model.hpp"
#include "xstable/point.hpp"

namespace xstable {

// Counts of rounding clamps applied while combining exponents. Differences
// of exponents are non-negative in exact arithmetic; small negative values
// are floating-point noise.
struct ClampStats {
  std::size_t silent = 0;
  std::size_t warned = 0;

  void merge(const ClampStats& o) {
    silent += o.silent;
    warned += o.warned;
  }
};

namespace detail {

// Clamp policy for exponent combinations: within 1e-10 * scale the value is
// zeroed silently, within 1e-8 * scale it is zeroed and counted as a
// warning, anything more negative means the model's exponents are not
// consistent with a max-stable law.
inline double clamp_nonnegative(double v, double scale, const char* what, ClampStats* stats) {
  if (v >= 0.0) return v;
  if (v >= -1e-10 * scale) {
    if (stats) ++stats->silent;
    return 0.0;
  }
  if (v >= -1e-8 * scale) {
    if (stats) ++stats->warned;
    return 0.0;
  }
  throw ModelError(std::string(what) + ": negative value " + std::to_string(v) +
                   " exceeds the rounding budget; model exponents are inconsistent");
}

}  // namespace detail

// chi_{A,B}(x) = V^A + V^B - V^{A u B}; zero exactly when the subvectors on
// A and B are independent.
template <exponent_model M>
double pair_chi(const M& model, IndexSet a, IndexSet b, const EvaluationPoint& x,
                ClampStats* stats = nullptr) {
  detail::check_disjoint_pair(a, b, model.ground(), "pair_chi");
  const double va = model.exponent(a, x);
  const double vb = model.exponent(b, x);
  const double vab = model.exponent(a | b, x);
  const double scale = std::max({va, vb, vab, 1e-300});
  return detail::clamp_nonnegative(va + vb - vab, scale, "pair_chi", stats);
}

// d_{A,B}(x) = V^{A u C} + V^{B u C} - V^{A u B u C} - V^C with C the rest
// of the ground set; for C empty this reduces to chi_{A,B}.
template <exponent_model M>
double pair_d(const M& model, IndexSet a, IndexSet b, const EvaluationPoint& x,
              ClampStats* stats = nullptr) {
  const IndexSet ground = model.ground();
  detail::check_disjoint_pair(a, b, ground, "pair_d");
  const IndexSet c = (a | b).complement_in(ground);
  if (c.empty()) return pair_chi(model, a, b, x, stats);
  const double vac = model.exponent(a | c, x);
  const double vbc = model.exponent(b | c, x);
  const double vall = model.exponent(ground, x);
  const double vc = model.exponent(c, x);
  const double scale = std::max({vac, vbc, vall, vc, 1e-300});
  return detail::clamp_nonnegative(vac + vbc - vall - vc, scale, "pair_d", stats);
}

// Lattice route for the same quantities: d_{A,B} sums d_L over subsets L
// inside A u B meeting both sides; chi_{A,B} drops the restriction to
// A u B.
inline double pair_d_from_table(const LatticeTable& mobius, IndexSet a, IndexSet b) {
  if (mobius.kind() != TableKind::mobius)
    throw StructuralError("pair_d_from_table: expected a mobius table");
  detail::check_disjoint_pair(a, b, mobius.ground(), "pair_d_from_table");
  const std::uint32_t ab = (a | b).bits();
  double out = 0.0;
  for (std::uint32_t sub = ab; sub; sub = (sub - 1) & ab)
    if ((sub & a.bits()) && (sub & b.bits())) out += mobius.at(IndexSet::from_bits(sub));
  return out;
}

inline double pair_chi_from_table(const LatticeTable& mobius, IndexSet a, IndexSet b) {
  if (mobius.kind() != TableKind::mobius)
    throw StructuralError("pair_chi_from_table: expected a mobius table");
  detail::check_disjoint_pair(a, b, mobius.ground(), "pair_chi_from_table");
  const std::uint32_t g = mobius.ground().bits();
  double out = 0.0;
  for (std::uint32_t m = 1; m <= g; ++m)
    if ((m & a.bits()) && (m & b.bits())) out += mobius.at(IndexSet::from_bits(m));
  return out;
}

// Default verdict tolerance, mildly loosened with the ground size.
inline double default_tolerance(IndexSet ground) { return 1e-9 * (1.0 + ground.size()); }

inline const std::vector<double>& default_grid_levels() {
  static const std::vector<double> levels{0.25, 0.5, 1.0, 2.0, 4.0};
  return levels;
}

inline constexpr std::size_t default_grid_cap = 100000;

// Tensor grid of per-coordinate levels over the support, in row-major order
// with the highest index varying fastest. When the full tensor exceeds the
// cap, an evenly strided deterministic subsample of exactly `cap` points is
// returned.
inline std::vector<EvaluationPoint> make_grid(IndexSet support, const std::vector<double>& levels,
                                              std::size_t cap = default_grid_cap) {
  if (support.empty()) throw StructuralError("make_grid: empty support");
  if (levels.empty()) throw DomainError("make_grid: no levels");
  for (double v : levels)
    if (!(std::isfinite(v) && v > 0.0)) throw DomainError("make_grid: levels must be positive");
  if (cap == 0) throw DomainError("make_grid: zero cap");
  const int n = support.size();
  const std::size_t base = levels.size();
  double total_f = 1.0;
  for (int i = 0; i < n; ++i) total_f *= static_cast<double>(base);
  if (total_f > 9e15) throw DomainError("make_grid: tensor grid too large to index");
  const auto total = static_cast<std::size_t>(total_f + 0.5);
  const std::size_t count = std::min(total, cap);
  std::vector<EvaluationPoint> out;
  out.reserve(count);
  std::vector<double> coords(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pick = total <= cap ? i : (i * total) / cap;
    std::size_t rem = pick;
    for (int pos = n - 1; pos >= 0; --pos) {
      coords[static_cast<std::size_t>(pos)] = levels[rem % base];
      rem /= base;
    }
    out.emplace_back(support, coords);
  }
  return out;
}

inline std::vector<EvaluationPoint> default_grid(IndexSet support) {
  return make_grid(support, default_grid_levels(), default_grid_cap);
}

namespace detail {

// Runs fn(begin, end, slot) over `threads` contiguous chunks. Exceptions are
// rethrown on the caller thread.
template <class Fn>
void parallel_chunks(std::size_t count, int threads, Fn&& fn) {
  const int usable =
      std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::size_t>(count, 64))));
  if (usable == 1 || count == 0) {
    fn(std::size_t{0}, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(usable));
  const std::size_t chunk = (count + static_cast<std::size_t>(usable) - 1) / static_cast<std::size_t>(usable);
  for (int t = 0; t < usable; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        if (begin < end) fn(begin, end, t);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// Grid summary for one disjoint pair of index sets.
struct PairDiagnostic {
  IndexSet set_a, set_b, set_c;
  std::size_t grid_size = 0;
  double sup_d = 0.0;
  double sup_chi = 0.0;
  double tolerance = 0.0;
  // No dependence detected on the grid: sup chi_{A,B} <= tolerance. Exact
  // only up to grid coverage unless a certificate confirms it.
  bool independent = false;
  // Whether the d-based exclusion applies: it needs a positive continuous
  // joint density, which the model advertises via smooth_density().
  bool density_criterion = false;
  // Conditional independence of the A and B margins given the rest is not
  // excluded by the necessary condition d_{A,B} = 0. Models without the
  // density property are never excluded by this criterion.
  bool ci_possible = false;
  // Exact structural certificate of independence, when the model offers one.
  std::optional<bool> certificate;
  ClampStats clamps;
};

template <exponent_model M>
PairDiagnostic diagnose_pair(const M& model, IndexSet a, IndexSet b,
                             const std::vector<EvaluationPoint>& grid, double tol,
                             int threads = 1) {
  const IndexSet ground = model.ground();
  detail::check_disjoint_pair(a, b, ground, "diagnose_pair");
  if (grid.empty()) throw DomainError("diagnose_pair: empty grid");
  if (!(tol >= 0.0)) throw DomainError("diagnose_pair: negative tolerance");

  PairDiagnostic out;
  out.set_a = a;
  out.set_b = b;
  out.set_c = (a | b).complement_in(ground);
  out.grid_size = grid.size();
  out.tolerance = tol;
  out.density_criterion = model.smooth_density();

  std::vector<double> sup_d(static_cast<std::size_t>(std::max(1, threads)), 0.0);
  std::vector<double> sup_chi = sup_d;
  std::vector<ClampStats> stats(sup_d.size());
  detail::parallel_chunks(grid.size(), threads, [&](std::size_t begin, std::size_t end, int slot) {
    auto& sd = sup_d[static_cast<std::size_t>(slot)];
    auto& sc = sup_chi[static_cast<std::size_t>(slot)];
    auto& st = stats[static_cast<std::size_t>(slot)];
    for (std::size_t i = begin; i < end; ++i) {
      sd = std::max(sd, pair_d(model, a, b, grid[i], &st));
      sc = std::max(sc, pair_chi(model, a, b, grid[i], &st));
    }
  });
  for (std::size_t t = 0; t < sup_d.size(); ++t) {
    out.sup_d = std::max(out.sup_d, sup_d[t]);
    out.sup_chi = std::max(out.sup_chi, sup_chi[t]);
    out.clamps.merge(stats[t]);
  }

  out.independent = out.sup_chi <= tol;
  out.ci_possible = !(out.density_criterion && out.sup_d > tol);
  if constexpr (has_independence_certificate<M>) {
    out.certificate = model.certify_pair_independence(a, b);
  }
  return out;
}

// Verdict wrappers with intent-revealing names; both run the same sweep.
template <exponent_model M>
PairDiagnostic independence_verdict(const M& model, IndexSet a, IndexSet b,
                                    const std::vector<EvaluationPoint>& grid, double tol,
                                    int threads = 1) {
  return diagnose_pair(model, a, b, grid, tol, threads);
}

template <exponent_model M>
PairDiagnostic ci_necessary_verdict(const M& model, IndexSet a, IndexSet b,
                                    const std::vector<EvaluationPoint>& grid, double tol,
                                    int threads = 1) {
  return diagnose_pair(model, a, b, grid, tol, threads);
}

// Block-system summary: pairwise chi sups plus, once every pair looks
// independent, a direct check that the exponent splits into a sum across
// blocks.
struct MultiwayReport {
  std::vector<IndexSet> blocks;
  std::vector<double> pair_sup_chi;  // row-major over pairs (i, j), i < j
  double tolerance = 0.0;
  std::size_t grid_size = 0;
  bool all_pairwise_independent = false;
  std::optional<double> factorization_residual;
  bool jointly_independent = false;

  double pair_value(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const std::size_t nb = blocks.size();
    if (i == j || j >= nb) throw StructuralError("MultiwayReport: bad pair index");
    std::size_t idx = 0;
    for (std::size_t r = 0; r < i; ++r) idx += nb - r - 1;
    return pair_sup_chi[idx + (j - i - 1)];
  }
};

template <exponent_model M>
MultiwayReport multiway_verdict(const M& model, const std::vector<IndexSet>& blocks,
                                const std::vector<EvaluationPoint>& grid, double tol,
                                int threads = 1) {
  const IndexSet ground = model.ground();
  if (blocks.size() < 2) throw StructuralError("multiway_verdict: need at least two blocks");
  IndexSet seen;
  for (IndexSet b : blocks) {
    detail::check_subset_arg(b, ground, "multiway_verdict");
    if (b.intersects(seen)) throw StructuralError("multiway_verdict: blocks overlap");
    seen = seen | b;
  }
  if (grid.empty()) throw DomainError("multiway_verdict: empty grid");

  MultiwayReport rep;
  rep.blocks = blocks;
  rep.tolerance = tol;
  rep.grid_size = grid.size();
  rep.all_pairwise_independent = true;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      const PairDiagnostic d = diagnose_pair(model, blocks[i], blocks[j], grid, tol, threads);
      rep.pair_sup_chi.push_back(d.sup_chi);
      rep.all_pairwise_independent = rep.all_pairwise_independent && d.independent;
    }
  if (!rep.all_pairwise_independent) return rep;

  std::vector<double> worst(static_cast<std::size_t>(std::max(1, threads)), 0.0);
  detail::parallel_chunks(grid.size(), threads, [&](std::size_t begin, std::size_t end, int slot) {
    double w = worst[static_cast<std::size_t>(slot)];
    for (std::size_t i = begin; i < end; ++i) {
      double sum = 0.0;
      for (IndexSet b : blocks) sum += model.exponent(b, grid[i]);
      const double joint = model.exponent(seen, grid[i]);
      w = std::max(w, std::fabs(joint - sum));
    }
    worst[static_cast<std::size_t>(slot)] = w;
  });
  double resid = 0.0;
  for (double w : worst) resid = std::max(resid, w);
  rep.factorization_residual = resid;
  rep.jointly_independent = resid <= tol;
  return rep;
}

}  // namespace xstable
