#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "opial/error.hpp"
#include "opial/sharpness.hpp"

using namespace opial;
using namespace opial::sharpness;

namespace {

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

bool nondecreasing(const ExtremalResult& r) {
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].second < r.trace[i - 1].second) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("ascent finds the constant maximizer on uniform {1..10}") {
  const QuantizedModel q = quantize(make_uniform_discrete(10), 1);
  for (Direction d : {Direction::below, Direction::above}) {
    const ExtremalResult r = maximize_ratio_opial(q, d);
    CHECK(r.converged);
    CHECK(r.ratio_star >= 1.0 - 1e-8);
    CHECK(r.ratio_star <= 1.0 + 1e-9);
    CHECK(spread(r.psi_star) <= 1e-4);
    CHECK(nondecreasing(r));
  }
}

TEST_CASE("ascent edge cases") {
  SUBCASE("single atom") {
    const ExtremalResult r = maximize_ratio_opial(QuantizedModel::from_atoms({0.0}, {1.0}),
                                                  Direction::below);
    CHECK(r.ratio_star == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.iterations == 0);
  }
  SUBCASE("skewed two atoms") {
    const QuantizedModel q = QuantizedModel::from_atoms({0.0, 1.0}, {0.9, 0.1});
    const std::vector<double> start{1.0, 5.0};
    const ExtremalResult r = maximize_ratio_opial(q, Direction::below, {}, start);
    CHECK(r.ratio_star >= 1.0 - 1e-8);
    CHECK(spread(r.psi_star) <= 1e-4);
  }
  SUBCASE("bad start") {
    const QuantizedModel q = QuantizedModel::from_atoms({0.0, 1.0}, {0.5, 0.5});
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(maximize_ratio_opial(q, Direction::below, {}, zero), InvalidArgument);
  }
}

TEST_CASE("ascent is deterministic and scale invariant") {
  const QuantizedModel q = quantize(make_uniform_interval(0.0, 1.0), 25);
  AscentOptions opts;
  opts.seed = 42;
  const ExtremalResult a = maximize_ratio_opial(q, Direction::above, opts);
  const ExtremalResult b = maximize_ratio_opial(q, Direction::above, opts);
  CHECK(a.trace == b.trace);
  CHECK(a.psi_star == b.psi_star);

  std::vector<double> scaled = a.psi_star;
  for (double& v : scaled) v *= -7.5;
  const ExtremalResult c = maximize_ratio_opial(q, Direction::above, opts, scaled);
  CHECK(std::abs(c.trace.front().second - a.ratio_star) <= 1e-12);
}

TEST_CASE("wirtinger constant: closed form at two nodes") {
  const WirtingerConstant w2 = wirtinger_best_constant(2);
  CHECK(w2.c_m == doctest::Approx(0.125).epsilon(1e-15));
  const WirtingerConstant skew =
      wirtinger_best_constant(QuantizedModel::from_atoms({0.0, 1.0}, {0.2, 0.8}));
  CHECK(skew.c_m == doctest::Approx(0.2 * 0.8 * 0.8).epsilon(1e-14));
  CHECK_THROWS_AS(wirtinger_best_constant(1), PreconditionError);
}

TEST_CASE("wirtinger constant: eigen residual and extremal shape") {
  const WirtingerConstant w = wirtinger_best_constant(1000);
  CHECK(w.extremal.converged);
  CHECK(w.residual <= 1e-8);
  CHECK(std::abs(w.c_m - 1.0 / (std::numbers::pi * std::numbers::pi)) <= 1e-3);
  CHECK(nondecreasing(w.extremal));

  const QuantizedModel q = quantize(make_uniform_interval(0.0, 1.0), 1000);
  const auto c = resolve(NodeFunction::cos_pi_F(), q);
  double dot = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    dot += c[i] * w.extremal.psi_star[i];
    nx += c[i] * c[i];
    ny += w.extremal.psi_star[i] * w.extremal.psi_star[i];
  }
  CHECK(std::abs(dot) / std::sqrt(nx * ny) >= 0.999);
}

TEST_CASE("wirtinger constant: iteration cap") {
  PowerOptions tight;
  tight.max_iterations = 3;
  CHECK_THROWS_AS(wirtinger_best_constant(200, tight), ConvergenceError);
}

TEST_CASE("convergence studies") {
  SUBCASE("first order is exact at every m") {
    const std::vector<std::size_t> grids{3, 17, 100};
    for (auto id : {FunctionalId::thm1_lower, FunctionalId::thm1_upper}) {
      const ConvergenceTable t = convergence_study(id, 0, grids);
      for (const auto& row : t.rows) CHECK(std::abs(row.value - 1.0) <= 1e-14);
    }
  }
  SUBCASE("second theorem, n = 2") {
    const std::vector<std::size_t> grids{16, 64, 256, 1024};
    const ConvergenceTable t = convergence_study(FunctionalId::thm2, 2, grids);
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows.front().error / t.rows.back().error >= 32.0);
    CHECK(t.fitted_order >= 0.8);
    CHECK(t.fitted_order <= 1.2);
    // psi = 1 on m equal atoms gives prod_{k<=n} (1 - k/m) exactly.
    CHECK(t.rows[0].value == doctest::Approx((1.0 - 1.0 / 16) * (1.0 - 2.0 / 16)).epsilon(1e-14));
  }
  SUBCASE("wirtinger errors shrink") {
    const std::vector<std::size_t> grids{100, 400, 1600};
    const ConvergenceTable t = convergence_study(FunctionalId::wirtinger, 0, grids);
    CHECK(t.rows[1].error < t.rows[0].error);
    CHECK(t.rows[2].error < t.rows[1].error);
    const std::string csv = to_csv(t);
    CHECK(csv.rfind("m,value,error,fitted_order\n100,", 0) == 0);
  }
  SUBCASE("bad grids") {
    const std::vector<std::size_t> down{64, 16};
    CHECK_THROWS_AS(convergence_study(FunctionalId::thm2, 1, down), InvalidArgument);
    const std::vector<std::size_t> ok{4, 8};
    CHECK_THROWS_AS(convergence_study(FunctionalId::o15, 1, ok), InvalidArgument);
  }
}

TEST_CASE("counterexample search") {
  SearchOptions opts;
  opts.trials = 2000;
  for (auto id : {FunctionalId::thm1_lower, FunctionalId::thm1_upper, FunctionalId::corollary,
                  FunctionalId::weighted_lower, FunctionalId::o15, FunctionalId::o9_2}) {
    const SearchResult r = search_counterexample(id, opts);
    CHECK(r.trials_run == 2000);
    CHECK_FALSE(r.counterexample.has_value());
  }

  // Out-of-class input is flagged, not counted against the theorem.
  const SearchResult w = search_counterexample(FunctionalId::wirtinger, opts);
  if (w.counterexample) CHECK(w.counterexample->heuristic);

  // Instances depend only on seed and trial index.
  const Instance a = random_instance(FunctionalId::thm2, opts, 17);
  const Instance b = random_instance(FunctionalId::thm2, opts, 17);
  CHECK(a.psi == b.psi);
  CHECK(a.mass == b.mass);
  CHECK_THROWS_AS(evaluate_instance(FunctionalId::troy, a), InvalidArgument);
}

TEST_CASE("o15 with a non-zero sum is a contract error") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(discrete_identities(a, DiscreteIdentity::o15), PreconditionError);
}
