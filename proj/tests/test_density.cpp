#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "xstable/density.hpp"
#include "xstable/discrete_measure.hpp"
#include "xstable/logistic.hpp"
#include "xstable/verify.hpp"

using namespace xstable;

TEST_CASE("partition sums count partitions and handle the empty set") {
  const LogisticModel model(3, 0.5);
  const EvaluationPoint ones = EvaluationPoint::all(model.ground(), 1.0);
  const PartitionSum empty = partition_sum(model, model.ground(), IndexSet{}, ones);
  CHECK(empty.value == 1.0);
  CHECK(empty.partition_count == 0);
  const PartitionSum full = partition_sum(model, model.ground(), model.ground(), ones);
  CHECK(full.partition_count == bell_number(3));
  CHECK(full.value > 0.0);
  const PartitionSum pairwise = partition_sum(model, model.ground(), IndexSet::of({0, 1}), ones);
  CHECK(pairwise.partition_count == bell_number(2));
}

TEST_CASE("partition sum equals its defining alternating sum") {
  const LogisticModel model(4, 0.65);
  const EvaluationPoint x(model.ground(), {0.9, 1.4, 2.0, 1.1});
  const IndexSet n_set = model.ground();
  const IndexSet m_set = IndexSet::of({0, 1, 3});
  double direct = 0.0;
  for_each_partition(m_set, [&](const SetPartition& p) {
    double prod = 1.0;
    for (const IndexSet block : p.blocks) prod *= mixed_partial(model, n_set, block, x);
    direct += (p.blocks.size() & 1) ? -prod : prod;
  });
  const PartitionSum got = partition_sum(model, n_set, m_set, x);
  CHECK(got.value == Catch::Approx(direct).epsilon(1e-12));
}

TEST_CASE("independence density factorizes") {
  const LogisticModel indep(3, 1.0);
  const EvaluationPoint x(indep.ground(), {0.7, 1.1, 2.4});
  double product = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double xi = x[i];
    product *= std::exp(-1.0 / xi) / (xi * xi);
  }
  CHECK(density(indep, indep.ground(), x) == Catch::Approx(product).epsilon(1e-12));
  // Marginal densities integrate the same way.
  CHECK(density(indep, IndexSet::of({1}), x) ==
        Catch::Approx(std::exp(-1.0 / 1.1) / (1.1 * 1.1)).epsilon(1e-12));
}

TEST_CASE("density matches difference quotients of the distribution function") {
  const LogisticModel model(2, 0.7);
  const IndexSet ground = model.ground();
  for (const double x0 : {0.6, 1.0, 1.9}) {
    for (const double x1 : {0.8, 1.5}) {
      const EvaluationPoint x(ground, {x0, x1});
      const double direct = density(model, ground, x);
      const double fd = detail::fd_mixed_functional(
          [&](const EvaluationPoint& p) { return std::exp(-model.exponent(ground, p)); }, x,
          ground);
      CHECK(direct == Catch::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("density rejects non-smooth models") {
  const DiscreteSpectralMeasure m = nested_max_linear_triple();
  const EvaluationPoint ones = EvaluationPoint::all(m.ground(), 1.0);
  CHECK_THROWS_AS(density(m, m.ground(), ones), ModelError);
  CHECK_THROWS_AS(conditional_cdf(m, IndexSet::of({0}), IndexSet::of({1}), ones), ModelError);
  CHECK_THROWS_AS(growth_probe(m, IndexSet::of({0}), IndexSet::of({2}), ones), ModelError);
}

TEST_CASE("finite-difference guard rails") {
  const LogisticModel model(7, 0.5);
  const EvaluationPoint ones = EvaluationPoint::all(model.ground(), 1.0);
  CHECK_THROWS_AS(
      mixed_partial(model, model.ground(), model.ground(), ones, DerivativeMethod::finite_difference),
      DomainError);  // order 7 > 6
  const LogisticModel small(2, 0.5);
  const EvaluationPoint tiny(small.ground(), {1e-4, 1.0});
  CHECK_THROWS_AS(mixed_partial(small, small.ground(), IndexSet::of({0}), tiny,
                                DerivativeMethod::finite_difference),
                  DomainError);  // coordinate below 1e-3
  CHECK_THROWS_AS(mixed_partial(small, IndexSet::of({0}), IndexSet::of({1}),
                                EvaluationPoint::all(small.ground(), 1.0)),
                  StructuralError);  // derivative set outside margin set
}

TEST_CASE("conditional cdf properties") {
  const LogisticModel model(3, 0.6);
  const IndexSet a = IndexSet::of({0});
  const IndexSet b = IndexSet::of({1, 2});
  const EvaluationPoint x(model.ground(), {1.0, 1.2, 0.9});
  const double at_one = conditional_cdf(model, a, b, x);
  CHECK(at_one > 0.0);
  CHECK(at_one <= 1.0);
  // Monotone increasing in the target coordinate.
  double prev = 0.0;
  for (const double t : {0.4, 0.8, 1.6, 3.2, 6.4}) {
    const double val = conditional_cdf(model, a, b, x.with(0, t));
    CHECK(val >= prev - 1e-12);
    prev = val;
  }
  // As the target coordinate grows, the conditional CDF approaches one.
  CHECK(conditional_cdf(model, a, b, x.with(0, 1e6)) == Catch::Approx(1.0).margin(1e-4));
  // Independence: conditioning drops out entirely.
  const LogisticModel indep(3, 1.0);
  const double cond = conditional_cdf(indep, a, b, x);
  const double marginal = std::exp(-indep.exponent(a, x));
  CHECK(cond == Catch::Approx(marginal).epsilon(1e-12));
  CHECK_THROWS_AS(conditional_cdf(model, a, IndexSet::of({0, 1}), x), StructuralError);
}

TEST_CASE("homogeneity of mixed partials") {
  const LogisticModel model(3, 0.45);
  const EvaluationPoint x(model.ground(), {1.3, 0.8, 2.2});
  const std::uint32_t g = model.ground().bits();
  for (std::uint32_t b = 1; b <= g; ++b) {
    const IndexSet bset = IndexSet::from_bits(b);
    const double base = mixed_partial(model, model.ground(), bset, x);
    for (const double t : {0.5, 3.0}) {
      const double scaled = mixed_partial(model, model.ground(), bset, x.scaled(t));
      CHECK(std::pow(t, bset.size() + 1) * scaled == Catch::Approx(base).epsilon(1e-10));
    }
  }
}

TEST_CASE("line fit recovers exact lines") {
  const LineFit fit = fit_line({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0});
  CHECK(fit.slope == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(fit.intercept == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(fit.r2 == Catch::Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(fit_line({1.0}, {2.0}), DomainError);
  CHECK_THROWS_AS(fit_line({1.0, 1.0}, {2.0, 3.0}), DomainError);
}

TEST_CASE("growth probe separates the dependent gap from the bounded ratio") {
  const LogisticModel model(3, 0.5);
  const EvaluationPoint ones = EvaluationPoint::all(model.ground(), 1.0);
  const GrowthProbe probe = growth_probe(model, IndexSet::of({0}), IndexSet::of({1}), ones);
  // The gap grows linearly in the scale with slope d(x).
  const double d_at_one = pair_d(model, IndexSet::of({0}), IndexSet::of({1}), ones);
  CHECK(probe.gap_at_one == Catch::Approx(d_at_one).epsilon(1e-13));
  CHECK(probe.rate == Catch::Approx(d_at_one).epsilon(1e-10));
  CHECK(probe.rate_r2 > 0.999);
  CHECK(probe.exponential_gap);
  CHECK(probe.ci_excluded);
  // Ratio of partition sums stays polynomially bounded (here exactly flat).
  CHECK(std::fabs(probe.ratio_loglog_slope) < 3.0 + 2.0);
  REQUIRE(probe.t_values.size() == probe.gap.size());
  REQUIRE(probe.t_values.size() == probe.ratio.size());

  // Independence: the gap vanishes identically and cannot exclude anything.
  const LogisticModel indep(3, 1.0);
  const GrowthProbe flat = growth_probe(indep, IndexSet::of({0}), IndexSet::of({1}), ones);
  CHECK(std::fabs(flat.gap_at_one) < 1e-14);
  CHECK_FALSE(flat.exponential_gap);
  CHECK_FALSE(flat.ci_excluded);
}

TEST_CASE("growth probe argument validation") {
  const LogisticModel model(3, 0.5);
  const EvaluationPoint ones = EvaluationPoint::all(model.ground(), 1.0);
  CHECK_THROWS_AS(growth_probe(model, IndexSet::of({0}), IndexSet::of({1}), ones, {1.0}),
                  DomainError);
  CHECK_THROWS_AS(growth_probe(model, IndexSet::of({0}), IndexSet::of({1}), ones, {1.0, -2.0}),
                  DomainError);
}

TEST_CASE("bivariate density mass is one for smooth models") {
  CHECK(bivariate_density_mass(LogisticModel(2, 1.0)) == Catch::Approx(1.0).margin(1e-6));
  CHECK(bivariate_density_mass(LogisticModel(2, 0.4)) == Catch::Approx(1.0).margin(1e-3));
}
