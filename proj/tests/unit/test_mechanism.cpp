#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "polykam/mechanism.hpp"

using namespace polykam;
using W = OperatorWord;

namespace {

const TwistGenerator kTwist = TwistGenerator::pure_twist();
const TwistGenerator kStd2 = TwistGenerator::standard(2.0);

PolyOrbit iterate(const std::vector<TwistGenerator>& fam, const std::vector<int>& labels, PhasePoint z) {
  PolyOrbit o;
  o.points.push_back(z);
  for (int l : labels) {
    z = apply_map(fam[static_cast<std::size_t>(l)], z);
    o.points.push_back(z);
    o.labels.push_back(l);
    o.residuals.push_back(0.0);
  }
  return o;
}

}  // namespace

TEST(GapArc, Examples) {
  EXPECT_EQ(gap_arc(ArgminSet{8, {2, 3}}, 4), (CyclicArc{8, 4, 6}));
  EXPECT_EQ(gap_arc(ArgminSet{8, {0, 4}}, 3), (CyclicArc{8, 1, 3}));
  EXPECT_POLYKAM_ERROR(gap_arc(ArgminSet{8, {0, 1, 2, 3, 4, 5, 6, 7}}, 1), ErrorCode::NoGap);
  EXPECT_POLYKAM_ERROR(gap_arc(ArgminSet{8, {0, 4}}, 4), ErrorCode::NoGap);
}

TEST(BumpForm, ZeroIntegral) {
  const BumpForm b = bump_form(CyclicArc{16, 3, 8}, 0.0, 16);
  for (double v : b.values) EXPECT_EQ(v, 0.0);
}

TEST(BumpForm, LinearInDelta) {
  const BumpForm b1 = bump_form(CyclicArc{32, 28, 10}, 0.01, 32), b2 = bump_form(CyclicArc{32, 28, 10}, 0.02, 32);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(b2.values[i], 2 * b1.values[i], 1e-15);
}

TEST(BumpForm, FrozenProfile) {
  // Raised cosine over l = 4 points: profile [0, 1.5, 1.5, 0], sum 3 s, and
  // 3 s / 8 = 0.1 gives s = 0.8 / 3.
  const BumpForm b = bump_form(CyclicArc{8, 1, 4}, 0.1, 8);
  const std::vector<double> expected{0, 0, 0.4, 0.4, 0, 0, 0, 0};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(b.values[i], expected[i], 1e-15) << i;
  EXPECT_DOUBLE_EQ(b.integral, 0.1);
  EXPECT_POLYKAM_ERROR(bump_form(CyclicArc{8, 1, 3}, 0.1, 8), ErrorCode::ArcTooShort);
}

TEST(BumpForm, IntegralAndSupport) {
  for (const CyclicArc& arc : {CyclicArc{64, 60, 13}, CyclicArc{64, 0, 64}, CyclicArc{64, 5, 4}}) {
    const BumpForm b = bump_form(arc, -0.03, 64);
    double sum = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      sum += b.values[i];
      if (!arc.contains(i)) EXPECT_EQ(b.values[i], 0.0);
    }
    EXPECT_NEAR(sum / 64, -0.03, 1e-12);
    EXPECT_EQ(b.values[arc.start], 0.0);
    EXPECT_EQ(b.values[(arc.start + arc.length - 1) % 64], 0.0);
  }
}

TEST(BumpSupport, TrimsQuarter) {
  EXPECT_EQ(bump_support(CyclicArc{64, 10, 40}), (CyclicArc{64, 20, 20}));
  EXPECT_EQ(bump_support(CyclicArc{64, 62, 5}).length, 4u);
}

TEST(MechanismStep, ZeroDeltaAppliesWord) {
  const GridSpec grid{64, 2};
  FamilyCostCache cache({kTwist, kStd2}, grid);
  const Pseudograph g{0.1, default_seeds(grid.n)[1]};
  const W w = W::parse("compose(h0,h1)");
  const MechanismStep s = mechanism_step(g, w, 0.0, cache.provider());
  EXPECT_EQ(s.g_after.c, 0.1);
  EXPECT_EQ(s.g_after.u, apply_word(w, cache.at(0.1), g.u).normalized());
}

TEST(MechanismStep, PureTwistBlocked) {
  const GridSpec grid{64, 2};
  FamilyCostCache cache({kTwist}, grid);
  const Pseudograph g{0.0, GridFunction(grid.n, 0.0)};
  for (const char* text : {"h0", "compose(h0,h0)", "pow(h0,4)"}) {
    EXPECT_POLYKAM_ERROR(mechanism_step(g, W::parse(text), 0.02, cache.provider()), ErrorCode::NoGap);
  }
}

TEST(MechanismStep, RejectsClosureAndLargeSteps) {
  const GridSpec grid{32, 2};
  FamilyCostCache cache({kTwist}, grid);
  const Pseudograph g{0.0, GridFunction(grid.n, 0.0)};
  EXPECT_POLYKAM_ERROR(mechanism_step(g, W::parse("closure(h0)"), 0.01, cache.provider()), ErrorCode::InvalidArgument);
  EXPECT_POLYKAM_ERROR(mechanism_step(g, W::parse("h0"), 0.2, cache.provider()), ErrorCode::InvalidArgument);
}

TEST(MechanismStep, AcceptedStepForTwistAndStandard) {
  const GridSpec grid{256, 2};
  FamilyCostCache cache({kTwist, kStd2}, grid);
  const Pseudograph g{0.0, GridFunction(grid.n, 0.0)};
  const W w = finite_reduction(W::parse("closure(compose(h0,h1))"), cache.at(0.0));
  ASSERT_TRUE(w.is_finite_type());
  const MechanismStep s = mechanism_step(g, w, 0.02, cache.provider());
  EXPECT_EQ(s.support_hits, 0u);
  EXPECT_NEAR(s.g_after.c - s.g_before.c, s.bump.integral, 1e-12);
  EXPECT_GT(s.bump.integral, 0.0);
  EXPECT_EQ(s.g_after.u.min(), 0.0);
  // Support audit: no backtracked chain starts where the bump is non-zero.
  for (int x = 0; x < static_cast<int>(grid.n); ++x) {
    const auto chain = backtrack(s.trace, x);
    ASSERT_FALSE(chain.empty());
    EXPECT_EQ(s.bump.values[static_cast<std::size_t>(chain.front().from)], 0.0);
  }
  const W direct = W::parse("compose(h0,h1)");
  const MechanismStep s2 = mechanism_step(g, direct, 0.02, cache.provider());
  EXPECT_EQ(s2.support_hits, 0u);
}

TEST(MechanismStep, CircleBlocksEveryWord) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist, TwistGenerator::standard(0.0)};
  FamilyCostCache cache(fam, grid);
  const auto circle = detect_common_circle(cache.at(0.3), 0.3, default_seeds(grid.n));
  ASSERT_TRUE(circle.has_value());
  for (const W& w : default_catalog(fam.size())) {
    const W f = finite_reduction(w, cache.at(0.3));
    EXPECT_POLYKAM_ERROR(mechanism_step(circle->circle, f, 0.02, cache.provider()), ErrorCode::NoGap);
  }
}

TEST(BacktrackOrbit, RigidRotation) {
  const GridSpec grid{10, 2};
  const std::vector<TwistGenerator> fam{kTwist};
  FamilyCostCache cache(fam, grid);
  const Pseudograph flat{0.3, GridFunction(grid.n, 0.0)};
  const MechanismStep s = mechanism_step(flat, W::parse("h0"), 0.0, cache.provider());
  const std::vector<MechanismStep> steps{s};
  const PolyOrbit o = backtrack_orbit(fam, steps, 7, grid.n);
  ASSERT_EQ(o.points.size(), 2u);
  EXPECT_NEAR(o.points[0].x, 0.4, 1e-15);
  EXPECT_NEAR(o.points[1].x, 0.7, 1e-15);
  for (const PhasePoint& z : o.points) EXPECT_NEAR(z.p, 0.3, 1e-15);
  EXPECT_LE(verify_polyorbit(fam, o, 1e-12).max_residual, 1e-15);

  const MechanismStep s2 = mechanism_step(flat, W::parse("compose(h0,h0)"), 0.0, cache.provider());
  const std::vector<MechanismStep> steps2{s2};
  const PolyOrbit o2 = backtrack_orbit(fam, steps2, 7, grid.n);
  ASSERT_EQ(o2.transitions(), 2u);
  for (const PhasePoint& z : o2.points) EXPECT_NEAR(z.p, 0.3, 1e-15);
}

TEST(BacktrackChain, NotBacktrackableWithoutTrace) {
  MechanismStep empty;
  const std::vector<MechanismStep> steps{empty};
  EXPECT_POLYKAM_ERROR(backtrack_chain(steps, 0), ErrorCode::NotBacktrackable);
}

TEST(VerifyPolyorbit, ExactOrbit) {
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const PolyOrbit o = iterate(fam, {0, 1, 1, 0, 1}, {0.2, 0.1});
  const OrbitReport r = verify_polyorbit(fam, o, 1e-12);
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.max_residual, 0.0);
  EXPECT_EQ(r.residuals.size(), 5u);
}

TEST(VerifyPolyorbit, PerturbedPoint) {
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  PolyOrbit o = iterate(fam, {0, 1, 1, 0, 1}, {0.2, 0.1});
  o.points[3].p += 1e-4;
  const OrbitReport r = verify_polyorbit(fam, o, 1e-3);
  EXPECT_GE(r.residuals[2], 0.5e-4);
  EXPECT_LE(r.residuals[2], 3e-4);
  EXPECT_GE(r.residuals[3], 0.5e-4);
  EXPECT_LE(r.residuals[3], 3e-4);
  EXPECT_TRUE(r.verified);
  EXPECT_FALSE(verify_polyorbit(fam, o, 1e-5).verified);
}

TEST(VerifyPolyorbit, VacuousAndMalformed) {
  const std::vector<TwistGenerator> fam{kTwist};
  EXPECT_TRUE(verify_polyorbit(fam, PolyOrbit{}, 1e-12).verified);
  PolyOrbit one;
  one.points.push_back({0.5, 0.2});
  EXPECT_TRUE(verify_polyorbit(fam, one, 1e-12).verified);
  PolyOrbit bad = iterate(fam, {0, 0}, {0.1, 0.2});
  bad.labels[1] = 3;
  EXPECT_FALSE(verify_polyorbit(fam, bad, 1e-3).verified);
  bad.labels.pop_back();
  EXPECT_FALSE(verify_polyorbit(fam, bad, 1e-3).verified);
}

TEST(RefineOrbit, RecoversTrueOrbit) {
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const std::vector<int> labels{1, 0, 1, 1, 0, 1, 1, 1};
  const PolyOrbit exact = iterate(fam, labels, {0.15, 0.2});
  std::vector<double> lifted{exact.points[0].x};
  for (std::size_t k = 0; k < labels.size(); ++k) {
    lifted.push_back(map_target_lift(fam[static_cast<std::size_t>(labels[k])], {wrap_unit(lifted.back()), exact.points[k].p}) -
                     wrap_unit(lifted.back()) + lifted.back());
  }
  std::vector<double> noisy = lifted;
  for (std::size_t k = 1; k + 1 < noisy.size(); ++k) noisy[k] += (k % 2 ? 1.0 : -1.0) * 3e-3;
  const RefineResult r = refine_orbit(fam, labels, noisy, exact.points.front().p, exact.points.back().p);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.max_defect, 1e-11);
  for (std::size_t k = 0; k < lifted.size(); ++k) EXPECT_NEAR(r.lifted[k], lifted[k], 1e-9) << k;
  const PolyOrbit o = orbit_from_lift(fam, labels, r.lifted);
  EXPECT_LE(verify_polyorbit(fam, o, 1e-9).max_residual, 1e-10);
}

TEST(Diffuse, EmptyInterval) {
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const DiffuseResult r = diffuse(fam, 0.3, 0.3, GridSpec{64, 2});
  EXPECT_TRUE(r.orbit.points.empty());
  EXPECT_TRUE(r.report.verified);
}

TEST(Diffuse, PureTwistBlocked) {
  const std::vector<TwistGenerator> fam{kTwist};
  EXPECT_POLYKAM_ERROR(diffuse(fam, 0.0, 1.0, GridSpec{64, 2}), ErrorCode::Blocked);
}

TEST(Diffuse, TwistAndStandardCoarseGrid) {
  const GridSpec grid{128, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const DiffuseResult r = diffuse(fam, 0.0, 1.0, grid);
  ASSERT_TRUE(r.report.verified);
  EXPECT_LE(r.report.max_residual, 1e-3);
  EXPECT_EQ(verify_polyorbit(fam, r.orbit, 1e-3).verified, true);
  EXPECT_NEAR(r.orbit.points.front().p, 0.0, 2.0 / 128 + 1e-6);
  EXPECT_NEAR(r.orbit.points.back().p, 1.0, 2.0 / 128 + 1e-6);
  double bumps = 0.0;
  for (const MechanismStep& s : r.trail) {
    bumps += s.bump.integral;
    EXPECT_EQ(s.support_hits, 0u);
    EXPECT_NEAR(s.g_after.c - s.g_before.c, s.bump.integral, 1e-12);
  }
  EXPECT_NEAR(bumps, 1.0, 1e-10);
  EXPECT_NEAR(r.trail.back().g_after.c, 1.0, 1e-12);
  EXPECT_EQ(r.orbit.transitions() + 1, r.orbit.points.size());
  EXPECT_EQ(r.raw_orbit.transitions(), r.orbit.transitions());
  EXPECT_EQ(r.raw_orbit.labels, r.orbit.labels);
  EXPECT_LE(r.shadow_distance, 0.05);
}

TEST(Diffuse, Downward) {
  const GridSpec grid{64, 2};
  const std::vector<TwistGenerator> fam{kTwist, kStd2};
  const DiffuseResult r = diffuse(fam, 0.3, -0.2, grid);
  ASSERT_TRUE(r.report.verified);
  EXPECT_NEAR(r.orbit.points.front().p, 0.3, 2.0 / 64 + 1e-6);
  EXPECT_NEAR(r.orbit.points.back().p, -0.2, 2.0 / 64 + 1e-6);
}

TEST(FamilyCostCache, ReusesEntries) {
  FamilyCostCache cache({kTwist, kStd2}, GridSpec{16, 2}, 2);
  const std::vector<CostMatrix>* first = &cache.at(0.1);
  EXPECT_EQ(&cache.at(0.1), first);
  EXPECT_EQ(cache.at(0.1).size(), 2u);
  cache.at(0.2);
  cache.at(0.3);
  EXPECT_TRUE(cache.at(0.1)[1].same_entries(build_cost_twist(kStd2, 0.1, GridSpec{16, 2})));
}
