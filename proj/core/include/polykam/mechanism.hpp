#pragma once

// The mechanism: bump one-forms placed off the I set, single steps that
// move the cohomology, argmin-chain orbits and the diffusion driver.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polykam/models.hpp"
#include "polykam/operator_word.hpp"
#include "polykam/orbit.hpp"
#include "polykam/pseudograph.hpp"
#include "polykam/weakkam.hpp"

namespace polykam {

struct MechanismOptions {
  double eps_step = 0.05;
  double delta_min = 1e-4;
  std::size_t gap_min = 0;  // 0: default_gap_min(n)
  double tol_argmin = 1e-9;  // relative, as in SolveOptions
};

// Longest run outside `set`; NoGap when shorter than gap_min.
CyclicArc gap_arc(const ArgminSet& set, std::size_t gap_min);

// nu_i = s (1 - cos(2 pi (i - a) / (l - 1))) for i = a..a+l-1 on the arc
// (a, l), zero at both arc endpoints and outside, with s fixed by
// sum(nu) / n = delta_c. ArcTooShort when l < 4.
BumpForm bump_form(const CyclicArc& arc, double delta_c, std::size_t n);

// Central part of a gap: about a quarter trimmed from each side, keeping at
// least 4 indices.
CyclicArc bump_support(const CyclicArc& gap);

// Family costs at a cohomology.
using CostProvider = std::function<const std::vector<CostMatrix>&(double c)>;

// Small LRU cache of family costs keyed by the exact cohomology value.
class FamilyCostCache {
 public:
  FamilyCostCache(std::vector<TwistGenerator> family, GridSpec grid, std::size_t capacity = 4);
  const std::vector<CostMatrix>& at(double c);
  CostProvider provider();
  const std::vector<TwistGenerator>& family() const noexcept { return family_; }
  const GridSpec& grid() const noexcept { return grid_; }

 private:
  std::vector<TwistGenerator> family_;
  GridSpec grid_;
  std::size_t capacity_;
  std::list<std::pair<double, std::vector<CostMatrix>>> entries_;
};

struct MechanismStep {
  OperatorWord word = OperatorWord::leaf(0);
  BumpForm bump;
  Pseudograph g_before;
  Pseudograph g_after;
  ArgminSet front;          // I_word(g_before)
  CyclicArc gap;
  ApplyTrace trace;         // application of the word at the new cohomology
  double delta_requested = 0.0;
  int halvings = 0;
  std::size_t support_hits = 0;  // backtracked chain starts inside the bump (0 when accepted)
};

// One step from g with a finite-type word: I, gap, bump of integral delta_c,
// g' = g + nu and g'' = T_word g' at cohomology g.c + delta_c (normalized).
// Every final index is backtracked; a chain starting where nu != 0 rejects
// the attempt and delta_c is halved down to delta_min (StepTooSmall).
// delta_c = 0 applies the word without a bump and needs no gap.
MechanismStep mechanism_step(const Pseudograph& g, const OperatorWord& word, double delta_c, const CostProvider& costs,
                             const MechanismOptions& options = {});

// Chain of transitions through every step, ending at terminal_index of the
// last step's output.
std::vector<Transition> backtrack_chain(std::span<const MechanismStep> steps, int terminal_index);

// Orbit from the chain, with momenta from the generating functions.
PolyOrbit backtrack_orbit(std::span<const TwistGenerator> family, std::span<const MechanismStep> steps,
                          int terminal_index, std::size_t n);

struct DiffuseOptions {
  MechanismOptions mechanism;
  ProbeOptions probe;
  std::vector<OperatorWord> catalog;  // empty: default_catalog
  std::size_t seed_count = 5;
  std::uint64_t rng_seed = 1;
  double tol_orbit = 1e-3;
  int reprobe_every = 10;
  bool refine = true;
  std::size_t max_steps = 5000;
};

struct DiffuseResult {
  PolyOrbit orbit;       // refined when refinement converged, else the raw chain orbit
  PolyOrbit raw_orbit;   // momenta from the grid chain itself
  OrbitReport report;
  OrbitReport raw_report;
  bool refined = false;
  double refine_defect = 0.0;
  double shadow_distance = 0.0;  // sup over points of |X_refined - X_chain| on the cover
  std::vector<MechanismStep> trail;
  std::vector<std::pair<double, RSpaceReport>> probes;
  int terminal_index = 0;
  std::size_t relaxations = 0;
};

class DiffusionStalled : public Error {
 public:
  DiffusionStalled(const std::string& what, std::vector<MechanismStep> trail, Pseudograph blocking)
      : Error(ErrorCode::DiffusionStalled, what), trail_(std::move(trail)), blocking_(std::move(blocking)) {}
  const std::vector<MechanismStep>& trail() const noexcept { return trail_; }
  const Pseudograph& blocking() const noexcept { return blocking_; }

 private:
  std::vector<MechanismStep> trail_;
  Pseudograph blocking_;
};

class Blocked : public Error {
 public:
  Blocked(const std::string& what, double c, RSpaceReport report)
      : Error(ErrorCode::Blocked, what), c_(c), report_(std::move(report)) {}
  double c() const noexcept { return c_; }
  const RSpaceReport& report() const noexcept { return report_; }

 private:
  double c_;
  RSpaceReport report_;
};

// Probes c_start, the midpoint and c_end (Blocked on a trivial verdict,
// Unresolved propagates), then steps from (c_start, 0) with the witness words
// until the cohomology reaches c_end, and assembles and certifies the orbit.
DiffuseResult diffuse(std::span<const TwistGenerator> family, double c_start, double c_end, const GridSpec& grid,
                      const DiffuseOptions& options = {});

}  // namespace polykam
