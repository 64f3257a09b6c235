#pragma once

// Per-cohomology analysis of a finite family: alpha curves, weak-KAM
// solutions, Aubry sets, common invariant circles, the R(c) probe and the
// switched-flow checks.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polykam/models.hpp"
#include "polykam/operator_word.hpp"
#include "polykam/pseudograph.hpp"
#include "polykam/tropical.hpp"

namespace polykam {

// 0, cos 2 pi x, -cos 2 pi x, then random trigonometric polynomials with
// decaying amplitudes drawn from rng_seed; `count` functions in total.
std::vector<GridFunction> default_seeds(std::size_t n, std::size_t count = 5, std::uint64_t rng_seed = 1);

struct AlphaPoint {
  double c = 0.0;
  double alpha = 0.0;
};

std::vector<AlphaPoint> alpha_curve(const TwistGenerator& gen, std::span<const double> c_values, const GridSpec& grid);

struct SolveOptions {
  double tol_fix = 1e-8;
  double dedupe_tol = 1e-6;
  double tol_argmin = 1e-9;  // relative: tolerance is tol_argmin * (1 + oscillation of the defect)
  ClosureConfig closure;
  int closure_retries = 2;
};

struct SolveResult {
  double alpha = 0.0;
  std::vector<Pseudograph> solutions;
  std::vector<double> residuals;  // sup |T u + alpha - u| per solution
  std::size_t dropped = 0;        // seeds rejected with NotFixed
};

// Weak-KAM solutions of the cost `a` from each seed through its Peierls
// closure, deduplicated modulo constants.
SolveResult weak_kam_solutions(const CostMatrix& a, double c, std::span<const GridFunction> seeds,
                               const SolveOptions& options = {});
SolveResult weak_kam_solutions(const TwistGenerator& gen, double c, const GridSpec& grid,
                               std::span<const GridFunction> seeds, const SolveOptions& options = {});
SolveResult weak_kam_solutions(const OperatorWord& word, std::span<const CostMatrix> costs, double c,
                               std::span<const GridFunction> seeds, const SolveOptions& options = {});

struct AubryResult {
  ArgminSet set;
  std::vector<PhasePoint> points;
  double alpha = 0.0;
};

// I = argmin_front(h, u) for the closure h of `a`, with phase points from the
// wedge of g against its dual image. Throws NotFixed if g is not a weak-KAM
// solution of `a` within tol_fix.
AubryResult aubry_set(const CostMatrix& a, const Pseudograph& g, const SolveOptions& options = {});
AubryResult aubry_set(const TwistGenerator& gen, double c, const Pseudograph& g, const GridSpec& grid,
                      const SolveOptions& options = {});

struct CircleOptions {
  double tol_fix = 1e-8;
  int max_iter = 200;
  ClosureConfig closure;
  int closure_retries = 2;
};

struct CircleResult {
  Pseudograph circle;
  std::vector<double> forward_residuals;   // half-oscillation of T_{h_i} g - g
  std::vector<double> backward_residuals;  // half-oscillation of T^_{h_i} g - g
  int iterations = 0;
  std::size_t seed_index = 0;
};

// Closures of every family member at one cohomology, computed once.
std::vector<PeierlsClosure> family_closures(std::span<const CostMatrix> costs, const ClosureConfig& config = {},
                                            int retries = 2);

// Iterates the cyclic composition of the closure operators from each seed;
// accepts a candidate fixed by every T_{h_i} and T^_{h_i}. Returns the first
// accepted one, nothing when every seed settles without acceptance, and
// throws Unresolved when none is accepted and some seed never settled.
std::optional<CircleResult> detect_common_circle(std::span<const PeierlsClosure> closures, double c,
                                                 std::span<const GridFunction> seeds, const CircleOptions& options = {});
std::optional<CircleResult> detect_common_circle(std::span<const CostMatrix> costs, double c,
                                                 std::span<const GridFunction> seeds, const CircleOptions& options = {});

// Compositions h_j o h_i (i != j, h_i applied first, ordered by (i, j)),
// then their closures, then the single generators.
std::vector<OperatorWord> default_catalog(std::size_t family_size);

// Longest cyclic run of indices outside `set`; ties go to the smallest start.
CyclicArc longest_gap(const ArgminSet& set);

std::size_t default_gap_min(std::size_t n);

enum class RVerdict { Trivial, Full };

struct GapWitness {
  OperatorWord word;
  Pseudograph g;
  ArgminSet set;
  CyclicArc arc;
};

struct RSpaceReport {
  RVerdict verdict = RVerdict::Trivial;
  std::optional<GapWitness> witness;
  std::optional<CircleResult> circle;
};

struct ProbeOptions {
  CircleOptions circle;
  SolveOptions solve;
  std::size_t gap_min = 0;  // 0: default_gap_min(n)
};

// Trivial when a common circle is detected; otherwise Full with the first
// catalog word (words outer, seeds inner) whose I set at its own closure
// fixed point misses an arc of at least gap_min indices. Throws Unresolved
// when neither is found.
RSpaceReport r_space_probe(std::span<const CostMatrix> costs, double c, std::span<const OperatorWord> catalog,
                           std::span<const GridFunction> seeds, const ProbeOptions& options = {});

struct SwitchedReport {
  Pseudograph g;
  ArgminSet set;
  std::vector<PhasePoint> points;
  double forward_deviation = 0.0;
  double backward_deviation = 0.0;
  double containment_residual = 0.0;
};

// For A = A_j o A_i (A_i first): maps the phase points of g over I_{h_A}(g),
// g the closure fixed point, forward by phi_j o phi_i and backward along
// argmin chains, and measures the distance to the same set. The containment
// residual is the half-oscillation of T_{h_j} g2 - g2 for g2 the closure fixed
// point of h_j o h_i.
SwitchedReport switched_invariance_check(std::span<const TwistGenerator> family, std::size_t i, std::size_t j,
                                         double c, const GridSpec& grid, const SolveOptions& options = {});

}  // namespace polykam
