#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "xstable/discrete_measure.hpp"
#include "xstable/lattice.hpp"
#include "xstable/model.hpp"

using namespace xstable;
using namespace xstable::testing;

TEST_CASE("table bookkeeping") {
  LatticeTable t(IndexSet::full(2), TableKind::exponent);
  CHECK(t.entry_count() == 3);
  CHECK_FALSE(t.complete());
  t.set(IndexSet::of({0}), 1.0);
  t.set(IndexSet::of({1}), 1.0);
  t.set(IndexSet::of({0, 1}), 1.5);
  CHECK(t.complete());
  CHECK(t.at(IndexSet::of({0, 1})) == 1.5);
  CHECK(t.max_abs() == 1.5);
  CHECK_THROWS_AS(t.at(IndexSet{}), StructuralError);
  CHECK_THROWS_AS(t.set(IndexSet{}, 0.0), StructuralError);
  CHECK_THROWS_AS(t.at(IndexSet::of({2})), StructuralError);
  CHECK_THROWS_AS(t.set(IndexSet::of({0}), std::nan("")), DomainError);
  CHECK_THROWS_AS(LatticeTable(IndexSet::of({1, 2}), TableKind::exponent), StructuralError);
}

TEST_CASE("transforms refuse incomplete or mistyped input") {
  LatticeTable t(IndexSet::full(2), TableKind::exponent);
  t.set(IndexSet::of({0}), 1.0);
  CHECK_THROWS_AS(mobius_from_exponent(t), StructuralError);
  t.set(IndexSet::of({1}), 1.0);
  t.set(IndexSet::of({0, 1}), 1.5);
  CHECK_THROWS_AS(chi_from_mobius(t), StructuralError);   // wants a mobius table
  CHECK_THROWS_AS(exponent_from_mobius(t), StructuralError);
  CHECK_THROWS_AS(mobius_from_chi(t), StructuralError);   // wants a chi table
  CHECK_NOTHROW(mobius_from_exponent(t));
  CHECK_NOTHROW(chi_from_exponent(t));
}

TEST_CASE("butterfly transforms equal the defining signed sums") {
  for (int dim = 1; dim <= 8; ++dim) {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
      const LatticeTable v = random_table(seed, dim, TableKind::exponent);
      const LatticeTable d = mobius_from_exponent(v);
      CHECK(max_table_diff(d, naive_mobius_from_exponent(v)) < 1e-12);
      const LatticeTable chi = chi_from_exponent(v);
      CHECK(max_table_diff(chi, naive_chi_from_exponent(v)) < 1e-12);

      const LatticeTable dm = random_table(seed + 100, dim, TableKind::mobius);
      CHECK(max_table_diff(exponent_from_mobius(dm), naive_exponent_from_mobius(dm)) < 1e-12);
      CHECK(max_table_diff(chi_from_mobius(dm), naive_chi_from_mobius(dm)) < 1e-12);

      const LatticeTable cm = random_table(seed + 200, dim, TableKind::chi);
      CHECK(max_table_diff(mobius_from_chi(cm), naive_mobius_from_chi(cm)) < 1e-12);
      CHECK(max_table_diff(exponent_from_chi(cm), naive_exponent_from_chi(cm)) < 1e-12);
    }
  }
}

TEST_CASE("round trips on arbitrary tables") {
  for (int dim = 1; dim <= 8; ++dim) {
    const LatticeTable v = random_table(7ull + static_cast<std::uint64_t>(dim), dim, TableKind::exponent);
    const LatticeTable d = mobius_from_exponent(v);
    CHECK(max_table_diff(exponent_from_mobius(d), v) < 1e-12);
    const LatticeTable chi = chi_from_mobius(d);
    CHECK(max_table_diff(mobius_from_chi(chi), d) < 1e-12);
    CHECK(max_table_diff(chi_from_exponent(v), chi) < 1e-12);
    CHECK(max_table_diff(exponent_from_chi(chi), v) < 1e-12);
  }
}

TEST_CASE("the chi/exponent map is an involution") {
  const LatticeTable t = random_table(99, 6, TableKind::exponent);
  const LatticeTable once = chi_from_exponent(t);
  LatticeTable as_chi(once.ground(), TableKind::chi);
  const std::uint32_t g = t.ground().bits();
  for (std::uint32_t m = 1; m <= g; ++m)
    as_chi.set(IndexSet::from_bits(m), once.at(IndexSet::from_bits(m)));
  CHECK(max_table_diff(exponent_from_chi(as_chi), t) < 1e-12);
}

TEST_CASE("independence model concentrates mobius mass on singletons") {
  const DiscreteSpectralMeasure indep = independence_measure(4);
  const EvaluationPoint x(indep.ground(), {0.5, 1.0, 2.0, 4.0});
  const LatticeTable d = mobius_from_exponent(exponent_table(indep, x));
  const std::uint32_t g = indep.ground().bits();
  for (std::uint32_t m = 1; m <= g; ++m) {
    const IndexSet a = IndexSet::from_bits(m);
    if (a.size() == 1) {
      CHECK(d.at(a) == Catch::Approx(1.0 / x[a.lowest()]).margin(1e-14));
    } else {
      CHECK(std::fabs(d.at(a)) < 1e-14);
    }
  }
}

TEST_CASE("zero equivalence of mobius and chi families") {
  // Two independent blocks: every mobius and every chi entry that straddles
  // the blocks must vanish together.
  std::vector<DiscreteSpectralMeasure::Atom> atoms;
  atoms.push_back({0.7, {1.0 / 0.7, 0.5 / 0.7, 0.0, 0.0}});
  atoms.push_back({0.5, {0.0, 1.0, 0.0, 0.0}});
  atoms.push_back({1.0, {0.0, 0.0, 0.6, 0.25}});
  atoms.push_back({0.5, {0.0, 0.0, 0.8, 1.5}});
  const DiscreteSpectralMeasure two_blocks = renormalized(DiscreteSpectralMeasure(4, atoms));
  const IndexSet left = IndexSet::of({0, 1});
  const EvaluationPoint x(two_blocks.ground(), {1.0, 2.0, 0.5, 1.0});
  const LatticeTable v = exponent_table(two_blocks, x);
  const LatticeTable d = mobius_from_exponent(v);
  const LatticeTable chi = chi_from_exponent(v);
  const std::uint32_t g = two_blocks.ground().bits();
  for (std::uint32_t m = 1; m <= g; ++m) {
    const IndexSet a = IndexSet::from_bits(m);
    const bool straddles = a.intersects(left) && !a.subset_of(left);
    if (straddles) {
      CHECK(std::fabs(d.at(a)) < 1e-14);
      CHECK(std::fabs(chi.at(a)) < 1e-14);
    }
  }
}

TEST_CASE("zero tolerance scales with the table") {
  LatticeTable t(IndexSet::full(1), TableKind::exponent);
  t.set(IndexSet::of({0}), 1000.0);
  CHECK(t.zero_tolerance() == Catch::Approx(1e-9 * 1001.0));
}
