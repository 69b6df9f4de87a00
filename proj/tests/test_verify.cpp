#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <utility>

#include "xstable/model_spec.hpp"
#include "xstable/verify.hpp"

using namespace xstable;

TEST_CASE("suite names enumerate the verification surface") {
  const auto names = suite_names();
  REQUIRE(names.size() == 5);
  CHECK(names == std::vector<std::string>{"mobius", "lemmas", "theorem", "density", "simulate"});
  CHECK_THROWS_AS(run_suite("everything", nullptr, 1, 1), DomainError);
}

TEST_CASE("disjoint pair enumeration is complete and duplicate-free") {
  // Unordered disjoint non-empty pairs over n points: (3^n - 2^(n+1) + 1) / 2.
  const auto count_for = [](int n) {
    double c = (std::pow(3.0, n) - 2.0 * std::pow(2.0, n) + 1.0) / 2.0;
    return static_cast<std::size_t>(c + 0.5);
  };
  for (int n = 2; n <= 4; ++n) {
    const auto pairs = disjoint_pairs(IndexSet::full(n));
    CHECK(pairs.size() == count_for(n));
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& [a, b] : pairs) {
      CHECK_FALSE(a.empty());
      CHECK_FALSE(b.empty());
      CHECK(a.disjoint_from(b));
      const std::pair<std::uint32_t, std::uint32_t> key = std::minmax(a.bits(), b.bits());
      CHECK(seen.insert(key).second);
    }
  }
}

TEST_CASE("seeded fixtures are reproducible") {
  const DiscreteSpectralMeasure a = random_discrete_measure(5, 4, 3);
  const DiscreteSpectralMeasure b = random_discrete_measure(5, 4, 3);
  REQUIRE(a.atoms().size() == b.atoms().size());
  for (std::size_t k = 0; k < a.atoms().size(); ++k) {
    CHECK(a.atoms()[k].weight == b.atoms()[k].weight);
    CHECK(a.atoms()[k].direction == b.atoms()[k].direction);
  }
  CHECK(check_moments(a).pass);
  const DiscreteSpectralMeasure c = random_discrete_measure(6, 4, 3);
  CHECK(a.atoms()[0].weight != c.atoms()[0].weight);
  CHECK_THROWS_AS(random_discrete_measure(5, 4, 0), DomainError);

  const EvaluationPoint p = random_point(9, 2, IndexSet::full(3));
  const EvaluationPoint q = random_point(9, 2, IndexSet::full(3));
  CHECK(p.coords() == q.coords());
  for (const double v : p.coords()) {
    CHECK(v >= 0.5);
    CHECK(v <= 4.0);
  }
}

TEST_CASE("functional difference oracle matches a closed-form derivative") {
  // f(x) = exp(-1/x0 - 1/x1); d2f/dx0 dx1 = f / (x0 x1)^2.
  const IndexSet ground = IndexSet::full(2);
  const auto f = [](const EvaluationPoint& p) {
    return std::exp(-1.0 / p[0] - 1.0 / p[1]);
  };
  const EvaluationPoint x(ground, {1.3, 0.9});
  const double exact = f(x) / (1.3 * 1.3 * 0.9 * 0.9);
  const double fd = detail::fd_mixed_functional(f, x, ground);
  CHECK(fd == Catch::Approx(exact).epsilon(1e-8));
}

TEST_CASE("bivariate mass quadrature is bivariate only") {
  CHECK_THROWS_AS(bivariate_density_mass(LogisticModel(3, 0.5)), DomainError);
}

TEST_CASE("suite reports aggregate pass, fail and skip") {
  SuiteReport rep;
  rep.add_bound("tight", 1.0, 1.0);
  rep.add_skip("elsewhere", "not applicable here");
  CHECK(rep.ok());
  CHECK(rep.checks[0].status == CheckResult::Status::pass);
  CHECK(rep.checks[1].status == CheckResult::Status::skip);
  rep.add_bound("busted", 2.0, 1.0);
  CHECK_FALSE(rep.ok());
  rep.checks.clear();
  rep.add_flag("claim", false, "why");
  CHECK_FALSE(rep.ok());
}

TEST_CASE("model-targeted suites skip what the model cannot express") {
  const ModelSpec logistic = parse_model_spec(
      R"({"kind":"logistic","indices":["a","b"],"params":{"alpha":0.7}})");
  const ModelSpec pair = parse_model_spec(R"({"kind":"max_linear","indices":["1","5"],
      "params":{"coefficients":[[1,1],[0,1],[0,1]],"renormalize":true}})");

  const SuiteReport lemmas_smooth = run_suite("lemmas", &logistic, 3, 1);
  CHECK(lemmas_smooth.ok());
  REQUIRE_FALSE(lemmas_smooth.checks.empty());
  CHECK(lemmas_smooth.checks[0].status == CheckResult::Status::skip);

  const SuiteReport density_atomic = run_suite("density", &pair, 3, 1);
  CHECK(density_atomic.ok());
  REQUIRE_FALSE(density_atomic.checks.empty());
  CHECK(density_atomic.checks[0].status == CheckResult::Status::skip);

  const SuiteReport simulate_smooth = run_suite("simulate", &logistic, 3, 1);
  CHECK(simulate_smooth.ok());
  REQUIRE_FALSE(simulate_smooth.checks.empty());
  CHECK(simulate_smooth.checks[0].status == CheckResult::Status::skip);
}

TEST_CASE("model-targeted suites pass on the shipped fixtures") {
  const ModelSpec logistic = parse_model_spec(
      R"({"kind":"logistic","indices":["a","b"],"params":{"alpha":0.7}})");
  const ModelSpec pair = parse_model_spec(R"({"kind":"max_linear","indices":["1","5"],
      "params":{"coefficients":[[1,1],[0,1],[0,1]],"renormalize":true}})");

  const SuiteReport mobius = run_suite("mobius", &pair, 3, 1);
  CHECK(mobius.ok());
  CHECK(mobius.suite == "mobius");

  const SuiteReport lemmas = run_suite("lemmas", &pair, 3, 1);
  CHECK(lemmas.ok());

  const SuiteReport theorem_smooth = run_suite("theorem", &logistic, 3, 1);
  CHECK(theorem_smooth.ok());

  const SuiteReport theorem_atomic = run_suite("theorem", &pair, 3, 1);
  CHECK(theorem_atomic.ok());

  const SuiteReport density = run_suite("density", &logistic, 3, 1);
  CHECK(density.ok());

  const SuiteReport simulate = run_suite("simulate", &pair, 3, 1);
  CHECK(simulate.ok());
  CHECK(simulate.suite == "simulate");
}
