#include "polykam/weakkam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace polykam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Uniform draw in [0, 1) from the top 53 bits, identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

GridFunction closure_fixed_point(const PeierlsClosure& pc, const GridFunction& seed, double tol_fix) {
  return weak_kam_from_barrier(pc, seed, tol_fix);
}

double distance_to_set(const PhasePoint& z, std::span<const PhasePoint> set) {
  double best = std::numeric_limits<double>::infinity();
  for (const PhasePoint& s : set) best = std::min(best, cylinder_distance(z, s));
  return best;
}

struct Front {
  ArgminSet set;
  std::vector<PhasePoint> points;
};

// I_a(g) together with the wedge points of g against T^_a T_a g.
Front front_points(const CostMatrix& a, const Pseudograph& g, double scale) {
  const GridFunction dual = dual_lax_oleinik(a, lax_oleinik(a, g.u));
  const GridFunction defect = g.u - dual;
  const double tol = scale * (1.0 + defect.oscillation());
  Front f;
  f.set = argmin_within(defect.values(), tol);
  f.points = wedge_graph(g, Pseudograph{g.c, dual}, tol);
  return f;
}

}  // namespace

std::vector<GridFunction> default_seeds(std::size_t n, std::size_t count, std::uint64_t rng_seed) {
  std::vector<GridFunction> out;
  const double dn = static_cast<double>(n);
  auto add = [&](auto f) {
    if (out.size() >= count) return;
    GridFunction g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = f(static_cast<double>(i) / dn);
    out.push_back(g.normalized());
  };
  add([](double) { return 0.0; });
  add([](double x) { return std::cos(kTwoPi * x); });
  add([](double x) { return -std::cos(kTwoPi * x); });
  std::mt19937_64 rng(rng_seed);
  while (out.size() < count) {
    double a[4], phase[4];
    for (int m = 0; m < 4; ++m) {
      a[m] = (2.0 * unit(rng) - 1.0) / ((m + 1) * (m + 1));
      phase[m] = unit(rng);
    }
    add([&](double x) {
      double v = 0.0;
      for (int m = 0; m < 4; ++m) v += a[m] * std::cos(kTwoPi * ((m + 1) * x + phase[m]));
      return v;
    });
  }
  return out;
}

std::vector<AlphaPoint> alpha_curve(const TwistGenerator& gen, std::span<const double> c_values, const GridSpec& grid) {
  std::vector<AlphaPoint> out;
  out.reserve(c_values.size());
  for (double c : c_values) out.push_back({c, tropical_eigenvalue(build_cost_twist(gen, c, grid))});
  return out;
}

// --------------------------------------------------------------- weak-KAM

SolveResult weak_kam_solutions(const CostMatrix& a, double c, std::span<const GridFunction> seeds,
                               const SolveOptions& options) {
  const PeierlsClosure pc = closure_with_retries(a, options.closure, options.closure_retries);
  SolveResult out;
  out.alpha = pc.alpha;
  for (const GridFunction& seed : seeds) {
    if (seed.size() != a.size()) throw Error(ErrorCode::GridMismatch, "seed and cost grids differ");
    GridFunction u;
    try {
      u = closure_fixed_point(pc, seed, options.tol_fix);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFixed) throw;
      ++out.dropped;
      continue;
    }
    const bool seen = std::any_of(out.solutions.begin(), out.solutions.end(), [&](const Pseudograph& g) {
      return half_oscillation_distance(g.u, u) <= options.dedupe_tol;
    });
    if (seen) continue;
    out.residuals.push_back(fixed_point_residual(a, pc.alpha, u));
    out.solutions.push_back({c, std::move(u)});
  }
  return out;
}

SolveResult weak_kam_solutions(const TwistGenerator& gen, double c, const GridSpec& grid,
                               std::span<const GridFunction> seeds, const SolveOptions& options) {
  return weak_kam_solutions(build_cost_twist(gen, c, grid), c, seeds, options);
}

SolveResult weak_kam_solutions(const OperatorWord& word, std::span<const CostMatrix> costs, double c,
                               std::span<const GridFunction> seeds, const SolveOptions& options) {
  return weak_kam_solutions(evaluate_word_detailed(word, costs, options.closure_retries).cost, c, seeds, options);
}

// ------------------------------------------------------------------ Aubry

AubryResult aubry_set(const CostMatrix& a, const Pseudograph& g, const SolveOptions& options) {
  const PeierlsClosure pc = closure_with_retries(a, options.closure, options.closure_retries);
  const double residual = fixed_point_residual(a, pc.alpha, g.u);
  if (!(residual <= options.tol_fix)) {
    throw Error(ErrorCode::NotFixed, "pseudograph is not a weak-KAM solution (residual " + std::to_string(residual) + ")");
  }
  Front f = front_points(pc.h, g, options.tol_argmin);
  return {std::move(f.set), std::move(f.points), pc.alpha};
}

AubryResult aubry_set(const TwistGenerator& gen, double c, const Pseudograph& g, const GridSpec& grid,
                      const SolveOptions& options) {
  if (std::abs(g.c - c) > 1e-12) throw Error(ErrorCode::CohomologyMismatch, "pseudograph cohomology differs from c");
  return aubry_set(build_cost_twist(gen, c, grid), g, options);
}

// ---------------------------------------------------------------- circles

std::vector<PeierlsClosure> family_closures(std::span<const CostMatrix> costs, const ClosureConfig& config,
                                            int retries) {
  std::vector<PeierlsClosure> out;
  out.reserve(costs.size());
  for (const CostMatrix& a : costs) out.push_back(closure_with_retries(a, config, retries));
  return out;
}

std::optional<CircleResult> detect_common_circle(std::span<const PeierlsClosure> closures, double c,
                                                 std::span<const GridFunction> seeds, const CircleOptions& options) {
  if (closures.empty()) throw Error(ErrorCode::InvalidArgument, "family must be non-empty");
  bool unsettled = false;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    GridFunction g = seeds[s].normalized();
    bool settled = false;
    int it = 0;
    while (it < options.max_iter) {
      ++it;
      GridFunction next = g;
      for (const PeierlsClosure& pc : closures) next = lax_oleinik(pc.h, next);
      next = next.normalized();
      const double change = half_oscillation_distance(next, g);
      g = std::move(next);
      if (change <= options.tol_fix) {
        settled = true;
        break;
      }
    }
    if (!settled) {
      unsettled = true;
      continue;
    }
    CircleResult r;
    r.circle = {c, g};
    r.iterations = it;
    r.seed_index = s;
    bool accept = true;
    for (const PeierlsClosure& pc : closures) {
      const double fwd = half_oscillation(lax_oleinik(pc.h, g) - g);
      const double bwd = half_oscillation(dual_lax_oleinik(pc.h, g) - g);
      r.forward_residuals.push_back(fwd);
      r.backward_residuals.push_back(bwd);
      accept = accept && fwd <= options.tol_fix && bwd <= options.tol_fix;
    }
    if (accept) return r;
  }
  if (unsettled) {
    throw Error(ErrorCode::Unresolved, "circle iteration did not settle within " + std::to_string(options.max_iter) +
                                           " rounds at c = " + std::to_string(c));
  }
  return std::nullopt;
}

std::optional<CircleResult> detect_common_circle(std::span<const CostMatrix> costs, double c,
                                                 std::span<const GridFunction> seeds, const CircleOptions& options) {
  const auto closures = family_closures(costs, options.closure, options.closure_retries);
  return detect_common_circle(std::span<const PeierlsClosure>(closures), c, seeds, options);
}

// ------------------------------------------------------------------ probe

std::vector<OperatorWord> default_catalog(std::size_t family_size) {
  std::vector<OperatorWord> pairs, closures, singles;
  for (std::size_t i = 0; i < family_size; ++i) {
    singles.push_back(OperatorWord::leaf(static_cast<int>(i)));
    for (std::size_t j = 0; j < family_size; ++j) {
      if (i == j) continue;
      OperatorWord w = OperatorWord::compose(OperatorWord::leaf(static_cast<int>(i)), OperatorWord::leaf(static_cast<int>(j)));
      closures.push_back(OperatorWord::closure(w));
      pairs.push_back(std::move(w));
    }
  }
  std::vector<OperatorWord> out = pairs;
  out.insert(out.end(), closures.begin(), closures.end());
  out.insert(out.end(), singles.begin(), singles.end());
  return out;
}

CyclicArc longest_gap(const ArgminSet& set) {
  const std::size_t n = set.n;
  if (set.empty()) return {n, 0, n};
  CyclicArc best{n, 0, 0};
  const auto& m = set.members;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const std::size_t a = static_cast<std::size_t>(m[k]);
    const std::size_t b = static_cast<std::size_t>(m[(k + 1) % m.size()]);
    const std::size_t gap = m.size() == 1 ? n - 1 : (b + n - a - 1) % n;
    const std::size_t start = (a + 1) % n;
    if (gap > best.length || (gap == best.length && gap > 0 && start < best.start)) best = {n, start, gap};
  }
  return best;
}

std::size_t default_gap_min(std::size_t n) { return std::max<std::size_t>(4, n / 32); }

RSpaceReport r_space_probe(std::span<const CostMatrix> costs, double c, std::span<const OperatorWord> catalog,
                           std::span<const GridFunction> seeds, const ProbeOptions& options) {
  if (catalog.empty()) throw Error(ErrorCode::InvalidArgument, "catalog must be non-empty");
  RSpaceReport report;
  bool circle_unresolved = false;
  try {
    if (auto circle = detect_common_circle(costs, c, seeds, options.circle)) {
      report.verdict = RVerdict::Trivial;
      report.circle = std::move(circle);
      return report;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unresolved) throw;
    circle_unresolved = true;
  }
  const std::size_t n = costs.front().size();
  const std::size_t gap_min = options.gap_min > 0 ? options.gap_min : default_gap_min(n);
  for (const OperatorWord& word : catalog) {
    const CostMatrix w = evaluate_word_detailed(word, costs, options.solve.closure_retries).cost;
    const PeierlsClosure pc = closure_with_retries(w, options.solve.closure, options.solve.closure_retries);
    for (const GridFunction& seed : seeds) {
      Pseudograph g{c, {}};
      try {
        g.u = closure_fixed_point(pc, seed, options.solve.tol_fix);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotFixed) throw;
        continue;
      }
      ArgminSet set = argmin_front_relative(w, g.u, options.solve.tol_argmin);
      const CyclicArc arc = longest_gap(set);
      if (arc.length >= gap_min) {
        report.verdict = RVerdict::Full;
        report.witness = GapWitness{word, std::move(g), std::move(set), arc};
        return report;
      }
    }
  }
  throw Error(ErrorCode::Unresolved, std::string("no common circle ") + (circle_unresolved ? "(iteration unsettled) " : "") +
                                         "and no catalog word with a gap of " + std::to_string(gap_min) +
                                         " indices at c = " + std::to_string(c));
}

// --------------------------------------------------------------- switched

SwitchedReport switched_invariance_check(std::span<const TwistGenerator> family, std::size_t i, std::size_t j,
                                         double c, const GridSpec& grid, const SolveOptions& options) {
  if (i >= family.size() || j >= family.size()) throw Error(ErrorCode::InvalidArgument, "pair outside the family");
  const std::vector<CostMatrix> costs = family_costs(family, c, grid);
  const OperatorWord pair = OperatorWord::compose(OperatorWord::leaf(static_cast<int>(i)), OperatorWord::leaf(static_cast<int>(j)));
  const CostMatrix a = evaluate_word(pair, costs);
  const PeierlsClosure pc = closure_with_retries(a, options.closure, options.closure_retries);

  SwitchedReport r;
  r.g = {c, closure_fixed_point(pc, GridFunction(grid.n, 0.0), options.tol_fix)};
  Front f = front_points(pc.h, r.g, options.tol_argmin);
  r.set = std::move(f.set);
  r.points = std::move(f.points);

  const TwistGenerator& gi = family[i];
  const TwistGenerator& gj = family[j];
  for (const PhasePoint& z : r.points) {
    const PhasePoint image = apply_map(gj, apply_map(gi, z));
    r.forward_deviation = std::max(r.forward_deviation, distance_to_set(image, r.points));
  }

  // Backward: the calibrating chain of T_A ending at each set index.
  ApplyTrace trace;
  apply_word(pair, costs, r.g.u, &trace);
  const double dn = static_cast<double>(grid.n);
  for (int x : r.set.members) {
    const std::vector<Transition> chain = backtrack(trace, x);
    const Transition& first = chain.front();
    const double y = first.from / dn;
    const double z = y + first.lift / dn;
    const PhasePoint pre{y, -gi.d1S(y, z)};
    r.backward_deviation = std::max(r.backward_deviation, distance_to_set(pre, r.points));
  }

  std::vector<PeierlsClosure> hs = family_closures(costs, options.closure, options.closure_retries);
  const CostMatrix hh = compose_costs(hs[i].h, hs[j].h);
  const PeierlsClosure pc2 = closure_with_retries(hh, options.closure, options.closure_retries);
  const GridFunction g2 = lax_oleinik(pc2.h, GridFunction(grid.n, 0.0)).normalized();
  r.containment_residual = half_oscillation(lax_oleinik(hs[j].h, g2) - g2);
  return r;
}

}  // namespace polykam
