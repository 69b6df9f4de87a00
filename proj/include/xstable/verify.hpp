#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "xstable/csv.hpp"
#include "xstable/density.hpp"
#include "xstable/diagnostics.hpp"
#include "xstable/discrete_measure.hpp"
#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/lattice.hpp"
#include "xstable/logistic.hpp"
#include "xstable/model.hpp"
#include "xstable/model_spec.hpp"
#include "xstable/point.hpp"
#include "xstable/simulate.hpp"

namespace xstable {

struct CheckResult {
  enum class Status { pass, fail, skip };
  std::string name;
  Status status = Status::pass;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double budget = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;

  bool ok() const {
    for (const CheckResult& c : checks)
      if (c.status == CheckResult::Status::fail) return false;
    return true;
  }

  void add_bound(const std::string& name, double measured, double budget,
                 const std::string& note = "") {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    c.budget = budget;
    c.status = measured <= budget ? CheckResult::Status::pass : CheckResult::Status::fail;
    c.note = note;
    checks.push_back(std::move(c));
  }

  void add_flag(const std::string& name, bool pass, const std::string& note = "") {
    CheckResult c;
    c.name = name;
    c.status = pass ? CheckResult::Status::pass : CheckResult::Status::fail;
    c.note = note;
    checks.push_back(std::move(c));
  }

  void add_skip(const std::string& name, const std::string& note) {
    CheckResult c;
    c.name = name;
    c.status = CheckResult::Status::skip;
    c.note = note;
    checks.push_back(std::move(c));
  }
};

namespace detail {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Seeded fixtures
// ---------------------------------------------------------------------------

// Random discrete measure with strictly positive directions, renormalised to
// standard margins. Fully determined by (seed, dimension, atom_count).
inline DiscreteSpectralMeasure random_discrete_measure(std::uint64_t seed, int dimension,
                                                       int atom_count) {
  if (atom_count < 1) throw DomainError("random_discrete_measure: need atoms");
  const CounterRng rng(seed);
  std::vector<DiscreteSpectralMeasure::Atom> atoms;
  for (int k = 0; k < atom_count; ++k) {
    DiscreteSpectralMeasure::Atom atom;
    atom.weight = 0.25 + rng.uniform_open(static_cast<std::uint64_t>(k), 0);
    for (int i = 0; i < dimension; ++i)
      atom.direction.push_back(rng.uniform_open(static_cast<std::uint64_t>(k), 1 + static_cast<std::uint64_t>(i)));
    atoms.push_back(std::move(atom));
  }
  return renormalized(DiscreteSpectralMeasure(dimension, std::move(atoms)));
}

// Random point with coordinates in [lo, hi], determined by (seed, stream).
inline EvaluationPoint random_point(std::uint64_t seed, std::uint64_t stream, IndexSet support,
                                    double lo = 0.5, double hi = 4.0) {
  const CounterRng rng(seed);
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(support.size()));
  std::uint64_t c = 0;
  for_each_member(support, [&](int) { coords.push_back(lo + (hi - lo) * rng.uniform_open(stream, c++)); });
  return EvaluationPoint(support, coords);
}

// Nested max-linear fixture on labels (1, 4, 5): the law of
// (Z1, max(Z1, Z2), max(Z1, Z2, Z3)) for independent standard Frechet Z,
// rescaled to standard margins. The middle component separates the outer
// two: they are conditionally independent given it, yet carry positive
// pairwise coefficients, which is the canonical non-smooth counterexample
// for the density-based exclusion.
inline DiscreteSpectralMeasure nested_max_linear_triple() {
  return max_linear_measure(3, {{1, 1, 1}, {0, 1, 1}, {0, 0, 1}}, true);
}

// The (first, last) margin of the same construction.
inline DiscreteSpectralMeasure nested_max_linear_pair() {
  return max_linear_measure(2, {{1, 1}, {0, 1}, {0, 1}}, true);
}

// All unordered pairs of disjoint non-empty subsets of `ground`.
inline std::vector<std::pair<IndexSet, IndexSet>> disjoint_pairs(IndexSet ground) {
  std::vector<std::pair<IndexSet, IndexSet>> out;
  const std::uint32_t g = ground.bits();
  for (std::uint32_t a = 1; a <= g; ++a) {
    if (a & ~g) continue;
    const std::uint32_t rest = g & ~a;
    for (std::uint32_t b = rest; b; b = (b - 1) & rest)
      if (a < b) out.emplace_back(IndexSet::from_bits(a), IndexSet::from_bits(b));
  }
  return out;
}

namespace detail {

inline double table_max_diff(const LatticeTable& lhs, const LatticeTable& rhs) {
  if (lhs.ground() != rhs.ground()) throw StructuralError("table_max_diff: ground sets differ");
  double worst = 0.0;
  const std::uint32_t g = lhs.ground().bits();
  for (std::uint32_t m = 1; m <= g; ++m) {
    const IndexSet a = IndexSet::from_bits(m);
    worst = std::max(worst, std::fabs(lhs.at(a) - rhs.at(a)));
  }
  return worst;
}

// Central-difference mixed derivative of an arbitrary positive-domain
// functional, with one Richardson step. Kept separate from the model
// derivative engine so cross-checks of that engine do not depend on it.
inline double fd_mixed_functional(const std::function<double(const EvaluationPoint&)>& f,
                                  const EvaluationPoint& x, IndexSet b) {
  const std::vector<int> coords = b.members();
  const int k = static_cast<int>(coords.size());
  const double eps = std::numeric_limits<double>::epsilon();
  const auto stencil = [&](double shrink) {
    const double rel = std::pow(eps, 1.0 / (k + 2)) * shrink;
    std::vector<double> h(coords.size());
    double denom = 1.0;
    for (std::size_t t = 0; t < coords.size(); ++t) {
      const double xi = x[coords[t]];
      volatile double bumped = xi + xi * rel;
      h[t] = bumped - xi;
      denom *= 2.0 * h[t];
    }
    double sum = 0.0;
    for (unsigned s = 0; s < (1u << k); ++s) {
      EvaluationPoint p = x;
      int negatives = 0;
      for (int t = 0; t < k; ++t) {
        const int j = coords[static_cast<std::size_t>(t)];
        if (s >> t & 1u) {
          p = p.with(j, x[j] + h[static_cast<std::size_t>(t)]);
        } else {
          p = p.with(j, x[j] - h[static_cast<std::size_t>(t)]);
          ++negatives;
        }
      }
      const double term = f(p);
      sum += (negatives & 1) ? -term : term;
    }
    return sum / denom;
  };
  const double coarse = stencil(1.0);
  const double fine = stencil(0.5);
  return (4.0 * fine - coarse) / 3.0;
}

// 16-point Gauss-Legendre rule on [-1, 1], positive nodes.
inline constexpr double gl16_nodes[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double gl16_weights[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

// Panel breakpoints on (0, 1) geometrically refined toward both endpoints.
inline std::vector<double> graded_unit_breakpoints(int levels) {
  std::vector<double> out;
  out.push_back(0.0);
  for (int j = levels; j >= 2; --j) out.push_back(std::ldexp(1.0, -j));
  out.push_back(0.5);
  for (int j = 2; j <= levels; ++j) out.push_back(1.0 - std::ldexp(1.0, -j));
  out.push_back(1.0);
  return out;
}

}  // namespace detail

// Integral of the bivariate density over the whole positive quadrant via the
// margin-standardising substitution x = -1/log(u), evaluated by composite
// Gauss-Legendre panels geometrically refined toward the corners where the
// transformed density can grow. Exact value is one.
template <exponent_model M>
double bivariate_density_mass(const M& model, int levels = 20,
                              DerivativeMethod method = DerivativeMethod::exact_if_available) {
  if (model.ground().size() != 2)
    throw DomainError("bivariate_density_mass: two-dimensional models only");
  const IndexSet ground = model.ground();
  const std::vector<double> brk = detail::graded_unit_breakpoints(levels);
  const auto integrand = [&](double u0, double u1) {
    const double x0 = -1.0 / std::log(u0);
    const double x1 = -1.0 / std::log(u1);
    const EvaluationPoint p(ground, {x0, x1});
    const double jac0 = x0 * x0 / u0;
    const double jac1 = x1 * x1 / u1;
    return density(model, ground, p, method) * jac0 * jac1;
  };
  double total = 0.0;
  for (std::size_t pi = 0; pi + 1 < brk.size(); ++pi) {
    const double a0 = brk[pi], b0 = brk[pi + 1];
    const double c0 = 0.5 * (a0 + b0), r0 = 0.5 * (b0 - a0);
    for (std::size_t pj = 0; pj + 1 < brk.size(); ++pj) {
      const double a1 = brk[pj], b1 = brk[pj + 1];
      const double c1 = 0.5 * (a1 + b1), r1 = 0.5 * (b1 - a1);
      double cell = 0.0;
      for (int i = 0; i < 16; ++i) {
        const double ni = i < 8 ? -detail::gl16_nodes[i] : detail::gl16_nodes[i - 8];
        const double wi = i < 8 ? detail::gl16_weights[i] : detail::gl16_weights[i - 8];
        const double u0 = c0 + r0 * ni;
        for (int j = 0; j < 16; ++j) {
          const double nj = j < 8 ? -detail::gl16_nodes[j] : detail::gl16_nodes[j - 8];
          const double wj = j < 8 ? detail::gl16_weights[j] : detail::gl16_weights[j - 8];
          const double u1 = c1 + r1 * nj;
          cell += wi * wj * integrand(u0, u1);
        }
      }
      total += cell * r0 * r1;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Acceptance batteries. Each returns one SuiteReport whose checks carry the
// measured extremes against their budgets.
// ---------------------------------------------------------------------------

// Transform round-trips on seed-pinned random discrete models:
// V -> d -> V, d -> chi -> d, V -> chi -> V -> chi, all within 1e-10.
inline SuiteReport criterion_mobius_roundtrips(std::uint64_t seed) {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "mobius-roundtrips";
  double worst_vdv = 0.0, worst_dcd = 0.0, worst_vcv = 0.0;
  for (int r = 0; r < 50; ++r) {
    const int dim = 3 + r % 4;
    const std::uint64_t model_seed = CounterRng(seed).bits(1, static_cast<std::uint64_t>(r));
    const int atom_count = 2 + static_cast<int>(model_seed % 7);
    const DiscreteSpectralMeasure m = random_discrete_measure(model_seed, dim, atom_count);
    for (int p = 0; p < 20; ++p) {
      const EvaluationPoint x =
          random_point(CounterRng(seed).bits(2, static_cast<std::uint64_t>(r)), static_cast<std::uint64_t>(p), m.ground());
      const LatticeTable v = exponent_table(m, x);
      const LatticeTable d = mobius_from_exponent(v);
      worst_vdv = std::max(worst_vdv, detail::table_max_diff(exponent_from_mobius(d), v));
      const LatticeTable chi = chi_from_mobius(d);
      worst_dcd = std::max(worst_dcd, detail::table_max_diff(mobius_from_chi(chi), d));
      const LatticeTable chi_direct = chi_from_exponent(v);
      const LatticeTable v_back = exponent_from_chi(chi_direct);
      worst_vcv = std::max(worst_vcv, detail::table_max_diff(v_back, v));
      worst_vcv = std::max(worst_vcv, detail::table_max_diff(chi_from_exponent(v_back), chi_direct));
    }
  }
  rep.add_bound("exponent->mobius->exponent", worst_vdv, 1e-10);
  rep.add_bound("mobius->chi->mobius", worst_dcd, 1e-10);
  rep.add_bound("exponent->chi->exponent->chi", worst_vcv, 1e-10);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Inclusion-exclusion tables against exact atom sums, for every subset and
// every unordered disjoint pair, within 1e-12.
inline SuiteReport criterion_lattice_vs_atoms(std::uint64_t seed) {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "lattice-vs-atoms";
  double worst_d = 0.0, worst_chi = 0.0, worst_pair_d = 0.0, worst_pair_chi = 0.0;
  for (int r = 0; r < 50; ++r) {
    const int dim = 3 + r % 4;
    const std::uint64_t model_seed = CounterRng(seed).bits(1, static_cast<std::uint64_t>(r));
    const int atom_count = 2 + static_cast<int>(model_seed % 7);
    const DiscreteSpectralMeasure m = random_discrete_measure(model_seed, dim, atom_count);
    const auto pairs = disjoint_pairs(m.ground());
    for (int p = 0; p < 20; ++p) {
      const EvaluationPoint x =
          random_point(CounterRng(seed).bits(2, static_cast<std::uint64_t>(r)), static_cast<std::uint64_t>(p), m.ground());
      const LatticeTable v = exponent_table(m, x);
      const LatticeTable d = mobius_from_exponent(v);
      const LatticeTable chi = chi_from_exponent(v);
      const auto [d_atoms, chi_atoms] = spectral_tables(m, x);
      worst_d = std::max(worst_d, detail::table_max_diff(d, d_atoms));
      worst_chi = std::max(worst_chi, detail::table_max_diff(chi, chi_atoms));
      for (const auto& [a, b] : pairs) {
        const PairCoefficients atom_pair = spectral_pair(m, a, b, x);
        worst_pair_d = std::max(worst_pair_d, std::fabs(pair_d_from_table(d, a, b) - atom_pair.d));
        worst_pair_chi =
            std::max(worst_pair_chi, std::fabs(pair_chi_from_table(d, a, b) - atom_pair.chi));
        worst_pair_d = std::max(worst_pair_d, std::fabs(pair_d(m, a, b, x) - atom_pair.d));
        worst_pair_chi = std::max(worst_pair_chi, std::fabs(pair_chi(m, a, b, x) - atom_pair.chi));
      }
    }
  }
  rep.add_bound("subset mobius vs atom sums", worst_d, 1e-12);
  rep.add_bound("subset chi vs atom sums", worst_chi, 1e-12);
  rep.add_bound("pair d vs atom sums", worst_pair_d, 1e-12);
  rep.add_bound("pair chi vs atom sums", worst_pair_chi, 1e-12);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Exact reference values of the nested max-linear fixture.
inline SuiteReport criterion_fixture_values() {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "fixture-values";
  const DiscreteSpectralMeasure triple = nested_max_linear_triple();
  const IndexSet first = IndexSet::of({0});
  const IndexSet last = IndexSet::of({2});
  {
    const EvaluationPoint ones = EvaluationPoint::all(triple.ground(), 1.0);
    rep.add_bound("pair d at ones", std::fabs(pair_d(triple, first, last, ones) - 0.0), 1e-12,
                  "outer pair, middle component conditioning");
    const auto [d_tab, chi_tab] = spectral_tables(triple, ones);
    rep.add_bound("first-margin mobius weight at ones", std::fabs(d_tab.at(first) - 0.5), 1e-12);
  }
  {
    const EvaluationPoint x(triple.ground(), {0.5, 2.0, 1.0});
    rep.add_bound("pair d at (1/2, 2, 1)", std::fabs(pair_d(triple, first, last, x) - 1.0 / 12.0),
                  1e-12, "positive although the construction is conditionally independent");
  }
  for (const double mid : {1.0, 4.0}) {
    const EvaluationPoint x(triple.ground(), {0.5, mid, 1.0});
    rep.add_bound("pair chi at (1/2, *, 1), middle " + format_real(mid),
                  std::fabs(pair_chi(triple, first, last, x) - 1.0 / 3.0), 1e-12);
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Dependent logistic models must show positive pairwise coefficients on the
// default grid for every disjoint pair; the independent boundary case must
// vanish.
inline SuiteReport criterion_dependence_sweep(int threads) {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "dependence-sweep";
  for (const double alpha : {0.3, 0.5, 0.7, 0.9}) {
    double min_chi = std::numeric_limits<double>::infinity();
    double min_d = min_chi;
    for (const int dim : {3, 4}) {
      const LogisticModel model(dim, alpha);
      const auto grid = default_grid(model.ground());
      for (const auto& [a, b] : disjoint_pairs(model.ground())) {
        const PairDiagnostic diag =
            diagnose_pair(model, a, b, grid, default_tolerance(model.ground()), threads);
        min_chi = std::min(min_chi, diag.sup_chi);
        min_d = std::min(min_d, diag.sup_d);
      }
    }
    rep.add_flag("alpha " + format_real(alpha) + " chi floor", min_chi > 0.01,
                 "smallest pair sup " + format_real(min_chi) + ", floor 0.01");
    rep.add_flag("alpha " + format_real(alpha) + " d floor", min_d > 1e-4,
                 "smallest pair sup " + format_real(min_d) + ", floor 1e-4");
  }
  {
    double max_chi = 0.0, max_d = 0.0;
    for (const int dim : {3, 4}) {
      const LogisticModel model(dim, 1.0);
      const auto grid = default_grid(model.ground());
      for (const auto& [a, b] : disjoint_pairs(model.ground())) {
        const PairDiagnostic diag =
            diagnose_pair(model, a, b, grid, default_tolerance(model.ground()), threads);
        max_chi = std::max(max_chi, diag.sup_chi);
        max_d = std::max(max_d, diag.sup_d);
      }
    }
    rep.add_bound("alpha 1 chi ceiling", max_chi, 1e-10);
    rep.add_bound("alpha 1 d ceiling", max_d, 1e-10);
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Scaling probe on a dependent trivariate logistic model: the gap grows
// exponentially at the predicted rate while the partition-sum ratio stays
// polynomially bounded.
inline SuiteReport criterion_growth_probe() {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "growth-probe";
  const LogisticModel model(3, 0.5);
  const EvaluationPoint x = EvaluationPoint::all(model.ground(), 1.0);
  const GrowthProbe probe = growth_probe(model, IndexSet::of({0}), IndexSet::of({1}), x);
  const double rel = std::fabs(probe.rate - probe.gap_at_one) /
                     std::max(std::fabs(probe.gap_at_one), 1e-300);
  rep.add_bound("rate matches pair d", rel, 1e-3,
                "rate " + format_real(probe.rate) + ", pair d " + format_real(probe.gap_at_one));
  rep.add_flag("exponential fit quality", probe.rate_r2 >= 0.999,
               "r2 " + format_real(probe.rate_r2));
  rep.add_bound("ratio log-log slope", std::fabs(probe.ratio_loglog_slope),
                static_cast<double>(model.ground().size() + 2));
  rep.add_flag("exclusion verdict", probe.ci_excluded, "dependent pair must be excluded");
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Partition-sum densities against difference quotients of the distribution
// function, quadrature mass, and derivative homogeneity.
inline SuiteReport criterion_density_engine() {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "density-engine";
  double worst_density_rel = 0.0;
  double worst_mass = 0.0;
  double worst_homog = 0.0;
  for (const double alpha : {0.5, 0.8}) {
    for (const int dim : {2, 3}) {
      const LogisticModel model(dim, alpha);
      const IndexSet ground = model.ground();
      const auto grid = make_grid(ground, {0.5, 1.0, 2.0});
      for (const EvaluationPoint& x : grid) {
        const double g = density(model, ground, x);
        const double oracle = detail::fd_mixed_functional(
            [&](const EvaluationPoint& p) { return std::exp(-model.exponent(ground, p)); }, x,
            ground);
        worst_density_rel = std::max(worst_density_rel, std::fabs(g - oracle) / std::fabs(oracle));
      }
      for (const EvaluationPoint& x : {EvaluationPoint::all(ground, 1.0),
                                       random_point(20240816, static_cast<std::uint64_t>(dim), ground)}) {
        const std::uint32_t gbits = ground.bits();
        for (std::uint32_t b = 1; b <= gbits; ++b) {
          const IndexSet bset = IndexSet::from_bits(b);
          if (bset.size() > 3) continue;
          const double base = mixed_partial(model, ground, bset, x);
          for (const double t : {0.5, 2.0}) {
            const double scaled = mixed_partial(model, ground, bset, x.scaled(t));
            const double rel = std::fabs(std::pow(t, bset.size() + 1) * scaled - base) /
                               std::max(std::fabs(base), 1e-300);
            worst_homog = std::max(worst_homog, rel);
          }
        }
      }
      if (dim == 2)
        worst_mass = std::max(worst_mass, std::fabs(bivariate_density_mass(model) - 1.0));
    }
  }
  rep.add_bound("density vs difference quotients of the cdf", worst_density_rel, 1e-4);
  rep.add_bound("bivariate density mass error", worst_mass, 1e-3);
  rep.add_bound("derivative homogeneity", worst_homog, 1e-5);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// A three-block product measure must look independent across blocks: all
// cross-block chi sups at zero and the exponent additive across blocks.
inline SuiteReport criterion_block_factorization(std::uint64_t seed, int threads) {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "block-factorization";
  std::vector<DiscreteSpectralMeasure::Atom> atoms;
  const int block_dims[3] = {2, 2, 2};
  int offset = 0;
  std::vector<IndexSet> blocks;
  for (int blk = 0; blk < 3; ++blk) {
    const DiscreteSpectralMeasure part =
        random_discrete_measure(CounterRng(seed).bits(7, static_cast<std::uint64_t>(blk)), block_dims[blk], 3);
    IndexSet block_set;
    for (int i = 0; i < block_dims[blk]; ++i) block_set = block_set | IndexSet::single(offset + i);
    blocks.push_back(block_set);
    for (const auto& atom : part.atoms()) {
      DiscreteSpectralMeasure::Atom embedded;
      embedded.weight = atom.weight;
      embedded.direction.assign(6, 0.0);
      for (int i = 0; i < block_dims[blk]; ++i)
        embedded.direction[static_cast<std::size_t>(offset + i)] = atom.direction[static_cast<std::size_t>(i)];
      atoms.push_back(std::move(embedded));
    }
    offset += block_dims[blk];
  }
  const DiscreteSpectralMeasure product(6, std::move(atoms));
  std::vector<EvaluationPoint> grid;
  for (int p = 0; p < 100; ++p)
    grid.push_back(random_point(CounterRng(seed).bits(8, 0), static_cast<std::uint64_t>(p), product.ground()));
  const MultiwayReport multi = multiway_verdict(product, blocks, grid, 1e-12, threads);
  double worst_pair = 0.0;
  for (double v : multi.pair_sup_chi) worst_pair = std::max(worst_pair, v);
  rep.add_bound("cross-block chi sup", worst_pair, 1e-12);
  rep.add_flag("pairwise verdict", multi.all_pairwise_independent);
  rep.add_bound("factorization residual",
                multi.factorization_residual.value_or(std::numeric_limits<double>::infinity()),
                1e-12);
  rep.add_flag("joint verdict", multi.jointly_independent);
  // Structural certificates must agree.
  bool certs = true;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i + 1; j < blocks.size(); ++j)
      certs = certs && product.certify_pair_independence(blocks[i], blocks[j]).value_or(false);
  rep.add_flag("atom-support certificates", certs);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Seed-pinned sampling check on the nested max-linear pair: distribution
// probes within three binomial standard errors at nine of ten points, and
// the empirical pair chi within three delta-method standard errors of 1/3.
inline SuiteReport criterion_sampling(std::uint64_t seed) {
  const detail::StopWatch clock;
  SuiteReport rep;
  rep.suite = "sampling";
  const DiscreteSpectralMeasure pair_model = nested_max_linear_pair();
  const std::size_t n = 200000;
  const SampleBatch batch = simulate_max_linear(pair_model, n, seed, "nested-pair");
  const IndexSet ground = pair_model.ground();
  const auto probes = deterministic_probe_points(ground, 10);
  const auto table = ecdf_probe_table(batch, ground, probes, [&](const EvaluationPoint& p) {
    return std::exp(-pair_model.exponent(ground, p));
  });
  int within = 0;
  for (const EcdfProbe& probe : table) within += probe.within_three_se ? 1 : 0;
  rep.add_flag("distribution probes", within >= 9,
               std::to_string(within) + "/10 probes within three standard errors");
  const EvaluationPoint ones = EvaluationPoint::all(ground, 1.0);
  const Estimate chi_hat = empirical_chi(batch, IndexSet::of({0}), IndexSet::of({1}), ones);
  const double exact = pair_chi(pair_model, IndexSet::of({0}), IndexSet::of({1}), ones);
  const double sigma = std::fabs(chi_hat.value - exact) / chi_hat.se;
  rep.add_bound("empirical pair chi sigma distance", sigma, 3.0,
                "estimate " + format_real(chi_hat.value) + " vs exact " + format_real(exact) +
                    " (se " + format_real(chi_hat.se) + ")");
  rep.wall_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Model-directed suites: the same checks pointed at a user-supplied model.
// Suites that need capabilities the model lacks skip with a notice.
// ---------------------------------------------------------------------------

inline std::vector<std::string> suite_names() {
  return {"mobius", "lemmas", "theorem", "density", "simulate"};
}

namespace detail {

template <exponent_model M>
void model_roundtrip_checks(const M& model, std::uint64_t seed, SuiteReport& rep) {
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    const EvaluationPoint x = random_point(seed, static_cast<std::uint64_t>(p), model.ground());
    const LatticeTable v = exponent_table(model, x);
    const LatticeTable d = mobius_from_exponent(v);
    worst = std::max(worst, table_max_diff(exponent_from_mobius(d), v));
    const LatticeTable chi = chi_from_mobius(d);
    worst = std::max(worst, table_max_diff(mobius_from_chi(chi), d));
    worst = std::max(worst, table_max_diff(chi_from_exponent(v), chi));
    worst = std::max(worst, table_max_diff(exponent_from_chi(chi), v));
  }
  rep.add_bound("transform round-trips over 20 seeded points", worst, 1e-10);
}

template <exponent_model M>
void model_probe_checks(const M& model, SuiteReport& rep) {
  const ProbeReport probe = probe_model(model);
  rep.add_bound("margin residual", probe.max_margin_residual, 1e-9);
  rep.add_bound("homogeneity residual", probe.max_homogeneity_residual, 1e-9);
  rep.add_bound("subset monotonicity violation", probe.max_monotonicity_violation, 1e-9);
}

}  // namespace detail

inline SuiteReport suite_mobius(const ModelSpec& spec, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "mobius";
  const detail::StopWatch clock;
  visit_model(spec.model, [&](const auto& m) {
    detail::model_probe_checks(m, rep);
    detail::model_roundtrip_checks(m, seed, rep);
    return 0;
  });
  rep.wall_seconds = clock.seconds();
  return rep;
}

inline SuiteReport suite_lemmas(const ModelSpec& spec, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "lemmas";
  const detail::StopWatch clock;
  const DiscreteSpectralMeasure* measure = as_discrete(spec.model);
  if (!measure) {
    rep.add_skip("atom-sum agreement", "model has no finite angular measure; nothing to compare");
    rep.wall_seconds = clock.seconds();
    return rep;
  }
  double worst_table = 0.0, worst_pair = 0.0;
  const auto pairs = disjoint_pairs(measure->ground());
  for (int p = 0; p < 10; ++p) {
    const EvaluationPoint x = random_point(seed, 100 + static_cast<std::uint64_t>(p), measure->ground());
    const LatticeTable v = exponent_table(*measure, x);
    const LatticeTable d = mobius_from_exponent(v);
    const LatticeTable chi = chi_from_exponent(v);
    const auto [d_atoms, chi_atoms] = spectral_tables(*measure, x);
    worst_table = std::max(worst_table, detail::table_max_diff(d, d_atoms));
    worst_table = std::max(worst_table, detail::table_max_diff(chi, chi_atoms));
    for (const auto& [a, b] : pairs) {
      const PairCoefficients atom_pair = spectral_pair(*measure, a, b, x);
      worst_pair = std::max(worst_pair, std::fabs(pair_d(*measure, a, b, x) - atom_pair.d));
      worst_pair = std::max(worst_pair, std::fabs(pair_chi(*measure, a, b, x) - atom_pair.chi));
      worst_pair = std::max(worst_pair, std::fabs(pair_d_from_table(d, a, b) - atom_pair.d));
      worst_pair = std::max(worst_pair, std::fabs(pair_chi_from_table(d, a, b) - atom_pair.chi));
    }
  }
  rep.add_bound("subset coefficients vs atom sums", worst_table, 1e-12);
  rep.add_bound("pair coefficients vs atom sums", worst_pair, 1e-12);
  rep.wall_seconds = clock.seconds();
  return rep;
}

inline SuiteReport suite_theorem(const ModelSpec& spec, std::uint64_t seed, int threads) {
  SuiteReport rep;
  rep.suite = "theorem";
  const detail::StopWatch clock;
  (void)seed;
  visit_model(spec.model, [&](const auto& model) {
    const IndexSet ground = model.ground();
    const double tol = default_tolerance(ground);
    const auto grid = default_grid(ground);
    auto pairs = disjoint_pairs(ground);
    if (ground.size() > 5) {
      pairs.clear();
      for_each_member(ground, [&](int i) {
        for_each_member(ground, [&](int j) {
          if (i < j) pairs.emplace_back(IndexSet::single(i), IndexSet::single(j));
        });
      });
      rep.add_skip("pair enumeration", "large ground set; singleton pairs only");
    }
    bool verdicts_consistent = true;
    bool certificates_consistent = true;
    std::string detail_note;
    const PairDiagnostic* first_dependent = nullptr;
    std::vector<PairDiagnostic> diags;
    diags.reserve(pairs.size());
    for (const auto& [a, b] : pairs)
      diags.push_back(diagnose_pair(model, a, b, grid, tol, threads));
    for (const PairDiagnostic& d : diags) {
      if (model.smooth_density()) {
        // With a positive continuous density the pairwise gap and chi vanish
        // together; a split verdict means an implementation inconsistency.
        const bool d_zero = d.sup_d <= tol;
        const bool chi_zero = d.sup_chi <= tol;
        if (d_zero != chi_zero) {
          verdicts_consistent = false;
          detail_note = "pair " + to_string(d.set_a) + " vs " + to_string(d.set_b);
        }
      }
      if (d.certificate.has_value()) {
        if (*d.certificate && d.sup_chi > tol) certificates_consistent = false;
        if (!*d.certificate && !(d.sup_chi > 0.0)) certificates_consistent = false;
      }
      if (!first_dependent && d.sup_d > tol) first_dependent = &d;
    }
    rep.add_flag("pairwise verdict consistency", verdicts_consistent, detail_note);
    rep.add_flag("certificate agreement", certificates_consistent);
    if (model.smooth_density()) {
      if (first_dependent) {
        const EvaluationPoint ones = EvaluationPoint::all(ground, 1.0);
        const GrowthProbe probe =
            growth_probe(model, first_dependent->set_a, first_dependent->set_b, ones);
        const double gap = probe.gap_at_one;
        if (gap > tol) {
          const double rel = std::fabs(probe.rate - gap) / gap;
          rep.add_bound("growth-probe rate agreement", rel, 1e-3);
          rep.add_flag("growth-probe exclusion", probe.ci_excluded);
        } else {
          rep.add_skip("growth probe", "gap at the unit point too small to probe");
        }
      } else {
        rep.add_skip("growth probe", "no dependent pair on the grid");
      }
    } else {
      rep.add_skip("growth probe", "non-smooth model: the density-based exclusion does not apply");
    }
    return 0;
  });
  rep.wall_seconds = clock.seconds();
  return rep;
}

inline SuiteReport suite_density(const ModelSpec& spec, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "density";
  const detail::StopWatch clock;
  if (!model_smooth(spec.model)) {
    rep.add_skip("density checks", "non-smooth model");
    rep.wall_seconds = clock.seconds();
    return rep;
  }
  visit_model(spec.model, [&](const auto& model) {
    const IndexSet ground = model.ground();
    IndexSet margin = ground;
    if (ground.size() > 3) {
      std::uint32_t bits = 0;
      int taken = 0;
      for_each_member(ground, [&](int i) {
        if (taken < 3) {
          bits |= 1u << i;
          ++taken;
        }
      });
      margin = IndexSet::from_bits(bits);
    }
    double worst_density_rel = 0.0;
    for (const EvaluationPoint& x : make_grid(margin, {0.5, 1.0, 2.0})) {
      const double g = density(model, margin, x);
      const double oracle = detail::fd_mixed_functional(
          [&](const EvaluationPoint& p) { return std::exp(-model.exponent(margin, p)); }, x,
          margin);
      worst_density_rel = std::max(worst_density_rel, std::fabs(g - oracle) / std::fabs(oracle));
    }
    rep.add_bound("density vs difference quotients of the cdf", worst_density_rel, 1e-4);
    double worst_homog = 0.0;
    const EvaluationPoint base = random_point(seed, 42, margin, 0.5, 2.0);
    const std::uint32_t mbits = margin.bits();
    for (std::uint32_t b = 1; b <= mbits; ++b) {
      if (b & ~mbits) continue;
      const IndexSet bset = IndexSet::from_bits(b);
      const double ref = mixed_partial(model, margin, bset, base);
      for (const double t : {0.5, 2.0}) {
        const double scaled = mixed_partial(model, margin, bset, base.scaled(t));
        worst_homog = std::max(worst_homog, std::fabs(std::pow(t, bset.size() + 1) * scaled - ref) /
                                                std::max(std::fabs(ref), 1e-300));
      }
    }
    rep.add_bound("derivative homogeneity", worst_homog, 1e-5);
    if (ground.size() == 2) {
      rep.add_bound("bivariate density mass error", std::fabs(bivariate_density_mass(model) - 1.0),
                    1e-3);
    } else {
      rep.add_skip("bivariate density mass", "quadrature check is bivariate only");
    }
    return 0;
  });
  rep.wall_seconds = clock.seconds();
  return rep;
}

inline SuiteReport suite_simulate(const ModelSpec& spec, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "simulate";
  const detail::StopWatch clock;
  const DiscreteSpectralMeasure* measure = as_discrete(spec.model);
  if (!measure) {
    rep.add_skip("sampling checks", "no exact sampler for this model kind");
    rep.wall_seconds = clock.seconds();
    return rep;
  }
  const std::size_t n = 200000;
  const SampleBatch batch = simulate_max_linear(*measure, n, seed, spec.digest);
  const IndexSet ground = measure->ground();
  const auto probes = deterministic_probe_points(ground, 10);
  const auto table = ecdf_probe_table(batch, ground, probes, [&](const EvaluationPoint& p) {
    return std::exp(-measure->exponent(ground, p));
  });
  int within = 0;
  for (const EcdfProbe& probe : table) within += probe.within_three_se ? 1 : 0;
  rep.add_flag("distribution probes", within >= 9,
               std::to_string(within) + "/10 probes within three standard errors");
  if (ground.size() >= 2) {
    const EvaluationPoint ones = EvaluationPoint::all(ground, 1.0);
    const IndexSet a = IndexSet::single(ground.members().front());
    const IndexSet b = IndexSet::single(ground.members()[1]);
    const double exact = pair_chi(*measure, a, b, ones);
    try {
      const Estimate chi_hat = empirical_chi(batch, a, b, ones);
      rep.add_bound("empirical pair chi sigma distance",
                    std::fabs(chi_hat.value - exact) / chi_hat.se, 3.0);
    } catch (const DomainError& e) {
      rep.add_skip("empirical pair chi", e.what());
    }
  }
  const DiscreteResampler resampler(*measure);
  const SamplerValidation val = validate_sampler(resampler, 20000, CounterRng::mix(seed));
  rep.add_bound("resampler moment sigma distance", val.worst_sigma, 3.0);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// Dispatch by suite name. Without a model, each suite runs its standalone
// battery; with a model, the checks target that model.
inline SuiteReport run_suite(const std::string& name, const ModelSpec* spec, std::uint64_t seed,
                             int threads) {
  if (name == "mobius") {
    if (spec) return suite_mobius(*spec, seed);
    SuiteReport rep = criterion_mobius_roundtrips(seed);
    rep.suite = "mobius";
    return rep;
  }
  if (name == "lemmas") {
    if (spec) return suite_lemmas(*spec, seed);
    SuiteReport rep = criterion_lattice_vs_atoms(seed);
    const SuiteReport fixture = criterion_fixture_values();
    for (const CheckResult& c : fixture.checks) rep.checks.push_back(c);
    rep.wall_seconds += fixture.wall_seconds;
    rep.suite = "lemmas";
    return rep;
  }
  if (name == "theorem") {
    if (spec) return suite_theorem(*spec, seed, threads);
    SuiteReport rep = criterion_dependence_sweep(threads);
    for (const SuiteReport& extra :
         {criterion_growth_probe(), criterion_block_factorization(seed, threads)}) {
      for (const CheckResult& c : extra.checks) rep.checks.push_back(c);
      rep.wall_seconds += extra.wall_seconds;
    }
    rep.suite = "theorem";
    return rep;
  }
  if (name == "density") {
    if (spec) return suite_density(*spec, seed);
    SuiteReport rep = criterion_density_engine();
    rep.suite = "density";
    return rep;
  }
  if (name == "simulate") {
    if (spec) return suite_simulate(*spec, seed);
    SuiteReport rep = criterion_sampling(seed);
    rep.suite = "simulate";
    return rep;
  }
  throw DomainError("unknown verification suite '" + name + "'");
}

}  // namespace xstable
