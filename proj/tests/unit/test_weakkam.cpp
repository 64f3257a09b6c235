#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "polykam/weakkam.hpp"

using namespace polykam;

namespace {

const TwistGenerator kTwist = TwistGenerator::pure_twist();
const TwistGenerator kStd2 = TwistGenerator::standard(2.0);

std::vector<GridFunction> seeds(std::size_t n) { return default_seeds(n); }

}  // namespace

TEST(Seeds, Defaults) {
  const auto s = default_seeds(16);
  ASSERT_EQ(s.size(), 5u);
  for (double v : s[0].values()) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 0; i < 16; ++i) {
    // Seeds are normalized to min 0.
    EXPECT_NEAR(s[1][i], 1.0 + std::cos(2 * std::numbers::pi * i / 16.0), 1e-15);
    EXPECT_NEAR(s[2][i], 1.0 - std::cos(2 * std::numbers::pi * i / 16.0), 1e-15);
  }
  EXPECT_NE(s[3], s[4]);
  EXPECT_EQ(default_seeds(16, 5, 7)[3], default_seeds(16, 5, 7)[3]);
  EXPECT_NE(default_seeds(16, 5, 7)[3], default_seeds(16, 5, 8)[3]);
  EXPECT_EQ(default_seeds(16, 2).size(), 2u);
}

TEST(AlphaCurve, PureTwist) {
  const GridSpec grid{256, 2};
  const std::vector<double> cs{0.0, 0.5};
  const auto a = alpha_curve(kTwist, cs, grid);
  EXPECT_EQ(a[0].alpha, 0.0);
  EXPECT_NEAR(a[1].alpha, 0.125, 1e-3);
}

TEST(AlphaCurve, StandardAtZeroIsExactlyZero) {
  const std::vector<double> cs{0.0};
  EXPECT_EQ(std::abs(alpha_curve(kStd2, cs, GridSpec{256, 2})[0].alpha), 0.0);
}

TEST(AlphaCurve, Convex) {
  std::vector<double> cs;
  for (int i = 0; i <= 20; ++i) cs.push_back(-1.0 + 0.1 * i);
  for (const TwistGenerator& gen : {kTwist, kStd2}) {
    const auto a = alpha_curve(gen, cs, GridSpec{64, 2});
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
      EXPECT_GE(a[i - 1].alpha - 2 * a[i].alpha + a[i + 1].alpha, -1e-6) << gen.name() << " c=" << cs[i];
    }
  }
}

TEST(WeakKamSolutions, PureTwistZeroSolution) {
  const GridSpec grid{64, 2};
  for (double c : {0.0, 0.3, -0.45}) {
    const std::vector<GridFunction> zero{GridFunction(grid.n, 0.0)};
    const SolveResult r = weak_kam_solutions(kTwist, c, grid, zero);
    ASSERT_EQ(r.solutions.size(), 1u);
    EXPECT_LE(polykam::testing::sup_norm(r.solutions[0].u), 1e-12);
    EXPECT_EQ(r.solutions[0].c, c);
  }
}

TEST(WeakKamSolutions, ToyUniqueSolution) {
  const CostMatrix toy{{1, 4}, {2, 0}};
  const std::vector<GridFunction> s{{0, 0}, {5, 1}};
  const SolveResult r = weak_kam_solutions(toy, 0.0, s);
  ASSERT_EQ(r.solutions.size(), 1u);
  EXPECT_NEAR(r.solutions[0].u[0], 2.0, 1e-12);
  EXPECT_NEAR(r.solutions[0].u[1], 0.0, 1e-12);
  EXPECT_EQ(r.dropped, 0u);
}

TEST(WeakKamSolutions, DuplicateSeedsDeduplicated) {
  const GridSpec grid{64, 2};
  const GridFunction c1 = default_seeds(grid.n)[1];
  const std::vector<GridFunction> s{c1, c1, c1 + 3.0};
  EXPECT_EQ(weak_kam_solutions(kStd2, 0.2, grid, s).solutions.size(), 1u);
}

TEST(WeakKamSolutions, Certified) {
  const GridSpec grid{64, 2};
  for (double c : {0.0, 0.37}) {
    const SolveResult r = weak_kam_solutions(kStd2, c, grid, seeds(grid.n));
    ASSERT_FALSE(r.solutions.empty());
    const CostMatrix a = build_cost_twist(kStd2, c, grid);
    for (std::size_t k = 0; k < r.solutions.size(); ++k) {
      EXPECT_LE(fixed_point_residual(a, r.alpha, r.solutions[k].u), 1e-8);
      EXPECT_LE(r.residuals[k], 1e-8);
      EXPECT_EQ(r.solutions[k].u.min(), 0.0);
    }
  }
}

TEST(WeakKamSolutions, WordOverload) {
  const GridSpec grid{32, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const auto costs = family_costs(fam, 0.0, grid);
  const SolveResult r = weak_kam_solutions(OperatorWord::parse("compose(h0,h1)"), costs, 0.0, seeds(grid.n));
  ASSERT_FALSE(r.solutions.empty());
  const CostMatrix a = evaluate_word(OperatorWord::parse("compose(h0,h1)"), costs);
  for (const Pseudograph& g : r.solutions) EXPECT_LE(fixed_point_residual(a, r.alpha, g.u), 1e-8);
}

TEST(AubrySet, PureTwistFullCircle) {
  const GridSpec grid{64, 2};
  const AubryResult r = aubry_set(kTwist, 0.3, {0.3, GridFunction(grid.n, 0.0)}, grid);
  EXPECT_TRUE(r.set.full());
  ASSERT_EQ(r.points.size(), grid.n);
  for (const PhasePoint& z : r.points) EXPECT_NEAR(z.p, 0.3, 1e-12);
}

TEST(AubrySet, Toy) {
  const CostMatrix toy{{1, 4}, {2, 0}};
  const AubryResult r = aubry_set(toy, {0.0, {2, 0}});
  EXPECT_EQ(r.set.members, (std::vector<int>{1}));
}

TEST(AubrySet, NotFixed) {
  const CostMatrix toy{{1, 4}, {2, 0}};
  EXPECT_POLYKAM_ERROR(aubry_set(toy, {0.0, {0, 3}}), ErrorCode::NotFixed);
}

TEST(AubrySet, StandardLocalizedAtHyperbolicPoint) {
  const GridSpec grid{256, 2};
  const std::vector<GridFunction> zero{GridFunction(grid.n, 0.0)};
  const SolveResult sol = weak_kam_solutions(kStd2, 0.0, grid, zero);
  ASSERT_FALSE(sol.solutions.empty());
  const AubryResult r = aubry_set(kStd2, 0.0, sol.solutions[0], grid);
  ASSERT_FALSE(r.set.empty());
  for (int i : r.set.members) EXPECT_LE(circle_distance(grid.point(static_cast<std::size_t>(i)), 0.0), 0.05) << i;
}

TEST(CommonCircle, PureTwist) {
  const GridSpec grid{64, 2};
  for (const std::vector<TwistGenerator>& fam :
       {std::vector<TwistGenerator>{kTwist}, std::vector<TwistGenerator>{kTwist, kTwist}}) {
    const auto costs = family_costs(fam, 0.3, grid);
    const auto r = detect_common_circle(costs, 0.3, seeds(grid.n));
    ASSERT_TRUE(r.has_value());
    EXPECT_LE(polykam::testing::sup_norm(r->circle.u), 1e-12);
    for (double v : r->forward_residuals) EXPECT_LE(v, 1e-12);
    for (double v : r->backward_residuals) EXPECT_LE(v, 1e-12);
    EXPECT_TRUE(is_c11_graph(r->circle, 1.0));
  }
}

TEST(CommonCircle, NoneForTwistAndStandard) {
  const GridSpec grid{128, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const auto costs = family_costs(fam, 0.0, grid);
  EXPECT_FALSE(detect_common_circle(costs, 0.0, seeds(grid.n)).has_value());
  const PeierlsClosure pc = peierls_closure(costs[1]);
  EXPECT_GT(half_oscillation(lax_oleinik(pc.h, GridFunction(grid.n, 0.0))), 0.01);
}

TEST(CommonCircle, UnresolvedWhenIterationCannotSettle) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const auto costs = family_costs(fam, 0.0, grid);
  CircleOptions opts;
  opts.max_iter = 1;
  opts.tol_fix = 1e-300;
  EXPECT_POLYKAM_ERROR(detect_common_circle(costs, 0.0, std::vector<GridFunction>{default_seeds(grid.n)[1]}, opts),
                       ErrorCode::Unresolved);
}

TEST(Catalog, DefaultOrder) {
  const auto cat = default_catalog(2);
  std::vector<std::string> names;
  for (const OperatorWord& w : cat) names.push_back(w.to_string());
  EXPECT_EQ(names, (std::vector<std::string>{"compose(h0,h1)", "compose(h1,h0)", "closure(compose(h0,h1))",
                                             "closure(compose(h1,h0))", "h0", "h1"}));
  EXPECT_EQ(default_catalog(1).size(), 1u);
  EXPECT_EQ(default_catalog(3).size(), 6u + 6u + 3u);
}

TEST(LongestGap, Examples) {
  EXPECT_EQ(longest_gap(ArgminSet{8, {2, 3}}), (CyclicArc{8, 4, 6}));
  EXPECT_EQ(longest_gap(ArgminSet{8, {0, 4}}), (CyclicArc{8, 1, 3}));
  EXPECT_EQ(longest_gap(ArgminSet{8, {0, 1, 2, 3, 4, 5, 6, 7}}).length, 0u);
  EXPECT_EQ(longest_gap(ArgminSet{8, {5}}), (CyclicArc{8, 6, 7}));
  EXPECT_EQ(default_gap_min(256), 8u);
  EXPECT_EQ(default_gap_min(64), 4u);
}

TEST(RSpaceProbe, TrivialWithCircle) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist};
  const auto costs = family_costs(fam, 0.3, grid);
  const RSpaceReport r = r_space_probe(costs, 0.3, default_catalog(1), seeds(grid.n));
  EXPECT_EQ(r.verdict, RVerdict::Trivial);
  ASSERT_TRUE(r.circle.has_value());
  EXPECT_FALSE(r.witness.has_value());
}

TEST(RSpaceProbe, ReorderInvariantWithCircle) {
  const GridSpec grid{64, 2};
  const TwistGenerator flat = TwistGenerator::standard(0.0);
  for (const std::vector<TwistGenerator>& fam :
       {std::vector<TwistGenerator>{kTwist, flat}, std::vector<TwistGenerator>{flat, kTwist}}) {
    const auto costs = family_costs(fam, 0.2, grid);
    EXPECT_EQ(r_space_probe(costs, 0.2, default_catalog(2), seeds(grid.n)).verdict, RVerdict::Trivial);
  }
}

TEST(RSpaceProbe, FullForTwistAndStandard) {
  const GridSpec grid{256, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const auto costs = family_costs(fam, 0.0, grid);
  const RSpaceReport r = r_space_probe(costs, 0.0, default_catalog(2), seeds(grid.n));
  ASSERT_EQ(r.verdict, RVerdict::Full);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->word.to_string(), "compose(h0,h1)");
  EXPECT_GE(r.witness->arc.length, default_gap_min(grid.n));
  for (int i : r.witness->arc.indices()) {
    EXPECT_FALSE(r.witness->set.contains(i));
  }
  // The gap lies away from the hyperbolic point x = 0.
  EXPECT_FALSE(r.witness->arc.contains(0));
}

TEST(RSpaceProbe, CircleMakesEveryFrontFull) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist, TwistGenerator::standard(0.0)};
  const auto costs = family_costs(fam, 0.4, grid);
  const auto circle = detect_common_circle(costs, 0.4, seeds(grid.n));
  ASSERT_TRUE(circle.has_value());
  for (const OperatorWord& w : default_catalog(2)) {
    const CostMatrix a = evaluate_word(w, costs);
    EXPECT_TRUE(argmin_front_relative(a, circle->circle.u, 1e-9).full()) << w.to_string();
  }
}

TEST(RSpaceProbe, UnresolvedWithoutGapOrCircle) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const auto costs = family_costs(fam, 0.0, grid);
  ProbeOptions opts;
  opts.gap_min = grid.n;
  EXPECT_POLYKAM_ERROR(r_space_probe(costs, 0.0, default_catalog(2), seeds(grid.n), opts), ErrorCode::Unresolved);
}

TEST(Switched, PureTwistPair) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist, kTwist};
  const SwitchedReport r = switched_invariance_check(fam, 0, 1, 0.3, grid);
  EXPECT_EQ(r.set.size(), grid.n);
  EXPECT_LE(r.forward_deviation, 2.0 / 64);
  EXPECT_LE(r.backward_deviation, 2.0 / 64);
  EXPECT_LE(r.containment_residual, 1e-6);
}

TEST(Switched, TwistAndStandard) {
  const GridSpec grid{256, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const SwitchedReport r = switched_invariance_check(fam, 0, 1, 0.0, grid);
  EXPECT_FALSE(r.points.empty());
  EXPECT_LE(r.forward_deviation, 10.0 / 256);
  EXPECT_LE(r.backward_deviation, 10.0 / 256);
  EXPECT_LE(r.containment_residual, 1e-6);
}
