#include "polykam/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polykam {

CyclicArc gap_arc(const ArgminSet& set, std::size_t gap_min) {
  const CyclicArc arc = longest_gap(set);
  if (arc.length < gap_min) {
    throw Error(ErrorCode::NoGap, "longest gap has " + std::to_string(arc.length) + " indices, need " +
                                      std::to_string(gap_min));
  }
  return arc;
}

BumpForm bump_form(const CyclicArc& arc, double delta_c, std::size_t n) {
  if (arc.length < 4) throw Error(ErrorCode::ArcTooShort, "bump arc needs at least 4 indices, got " + std::to_string(arc.length));
  if (arc.n != n) throw Error(ErrorCode::GridMismatch, "arc and grid sizes differ");
  if (!std::isfinite(delta_c)) throw Error(ErrorCode::InvalidScalar, "bump integral must be finite");
  BumpForm nu;
  nu.values.assign(n, 0.0);
  nu.support = arc;
  nu.integral = delta_c;
  if (delta_c == 0.0) return nu;
  const double span = static_cast<double>(arc.length - 1);
  std::vector<double> profile(arc.length, 0.0);
  double mass = 0.0;
  for (std::size_t t = 1; t + 1 < arc.length; ++t) {
    profile[t] = 1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / span);
    mass += profile[t];
  }
  const double s = delta_c * static_cast<double>(n) / mass;
  for (std::size_t t = 0; t < arc.length; ++t) nu.values[(arc.start + t) % n] = s * profile[t];
  return nu;
}

CyclicArc bump_support(const CyclicArc& gap) {
  std::size_t trim = gap.length / 4;
  std::size_t len = gap.length - 2 * trim;
  if (len < 4) {
    len = std::min<std::size_t>(4, gap.length);
    trim = (gap.length - len) / 2;
  }
  return {gap.n, gap.n ? (gap.start + trim) % gap.n : 0, len};
}

// ------------------------------------------------------------------ costs

FamilyCostCache::FamilyCostCache(std::vector<TwistGenerator> family, GridSpec grid, std::size_t capacity)
    : family_(std::move(family)), grid_(grid), capacity_(std::max<std::size_t>(2, capacity)) {
  grid_.validate();
}

const std::vector<CostMatrix>& FamilyCostCache::at(double c) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->first == c) {
      entries_.splice(entries_.begin(), entries_, it);
      return entries_.front().second;
    }
  }
  entries_.emplace_front(c, family_costs(family_, c, grid_));
  while (entries_.size() > capacity_) entries_.pop_back();
  return entries_.front().second;
}

CostProvider FamilyCostCache::provider() {
  return [this](double c) -> const std::vector<CostMatrix>& { return at(c); };
}

// ------------------------------------------------------------------- step

MechanismStep mechanism_step(const Pseudograph& g, const OperatorWord& word, double delta_c, const CostProvider& costs,
                             const MechanismOptions& options) {
  if (!word.is_finite_type()) throw Error(ErrorCode::InvalidArgument, "mechanism steps need a finite-type word");
  if (!std::isfinite(delta_c)) throw Error(ErrorCode::InvalidScalar, "delta_c must be finite");
  if (std::abs(delta_c) > options.eps_step * (1 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "delta_c exceeds eps_step");
  }
  const std::size_t n = g.size();
  const std::size_t gap_min = options.gap_min > 0 ? options.gap_min : default_gap_min(n);

  MechanismStep step;
  step.word = word;
  step.g_before = g;
  step.delta_requested = delta_c;
  {
    const std::vector<CostMatrix>& here = costs(g.c);
    step.front = argmin_front_relative(evaluate_word(word, here), g.u, options.tol_argmin);
  }

  if (delta_c == 0.0) {
    step.gap = longest_gap(step.front);
    step.bump = BumpForm{std::vector<double>(n, 0.0), CyclicArc{n, 0, 0}, 0.0};
    const GridFunction v = apply_word(word, costs(g.c), g.u, &step.trace);
    step.g_after = {g.c, v.normalized()};
    return step;
  }

  step.gap = gap_arc(step.front, gap_min);
  const CyclicArc support = bump_support(step.gap);
  double delta = delta_c;
  for (;;) {
    step.bump = bump_form(support, delta, n);
    const Pseudograph lifted = pseudograph_sum(g, step.bump);
    step.trace = ApplyTrace{};
    const GridFunction v = apply_word(word, costs(lifted.c), lifted.u, &step.trace);
    std::size_t hits = 0;
    for (std::size_t x = 0; x < n; ++x) {
      const std::vector<Transition> chain = backtrack(step.trace, static_cast<int>(x));
      if (!chain.empty() && step.bump.values[static_cast<std::size_t>(chain.front().from)] != 0.0) ++hits;
    }
    step.support_hits = hits;
    if (hits == 0) {
      step.g_after = {lifted.c, v.normalized()};
      return step;
    }
    delta *= 0.5;
    ++step.halvings;
    if (std::abs(delta) < options.delta_min) {
      throw Error(ErrorCode::StepTooSmall, std::to_string(hits) + " chains start inside the bump even at delta " +
                                               std::to_string(2 * delta) + " from c = " + std::to_string(g.c));
    }
  }
}

// ------------------------------------------------------------------ orbits

std::vector<Transition> backtrack_chain(std::span<const MechanismStep> steps, int terminal_index) {
  std::vector<std::vector<Transition>> pieces;
  int x = terminal_index;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    std::vector<Transition> piece = backtrack(it->trace, x);
    if (!piece.empty()) x = piece.front().from;
    pieces.push_back(std::move(piece));
  }
  std::vector<Transition> chain;
  for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) chain.insert(chain.end(), it->begin(), it->end());
  return chain;
}

PolyOrbit backtrack_orbit(std::span<const TwistGenerator> family, std::span<const MechanismStep> steps,
                          int terminal_index, std::size_t n) {
  const std::vector<Transition> chain = backtrack_chain(steps, terminal_index);
  if (chain.empty()) return {};
  const double dn = static_cast<double>(n);
  std::vector<double> lifted{chain.front().from / dn};
  std::vector<int> labels;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Transition& t = chain[k];
    if (!t.has_lift) throw Error(ErrorCode::NotBacktrackable, "transition without a recorded lift");
    if (k > 0 && chain[k - 1].to != t.from) throw Error(ErrorCode::NotBacktrackable, "chain is not contiguous");
    lifted.push_back(lifted.back() + t.lift / dn);
    labels.push_back(t.generator);
  }
  return orbit_from_lift(family, labels, lifted);
}

// ------------------------------------------------------------------ driver

namespace {

int argmin_index(const GridFunction& u) {
  const auto v = u.values();
  return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

DiffuseResult diffuse(std::span<const TwistGenerator> family, double c_start, double c_end, const GridSpec& grid,
                      const DiffuseOptions& options) {
  if (!std::isfinite(c_start) || !std::isfinite(c_end)) throw Error(ErrorCode::InvalidScalar, "endpoints must be finite");
  grid.validate();
  DiffuseResult result;
  if (c_start == c_end) return result;

  FamilyCostCache cache(std::vector<TwistGenerator>(family.begin(), family.end()), grid);
  const CostProvider provider = cache.provider();
  const std::vector<OperatorWord> catalog = options.catalog.empty() ? default_catalog(family.size()) : options.catalog;
  const std::vector<GridFunction> seeds = default_seeds(grid.n, options.seed_count, options.rng_seed);

  auto probe = [&](double c) {
    RSpaceReport r = r_space_probe(provider(c), c, catalog, seeds, options.probe);
    if (r.verdict == RVerdict::Trivial) {
      throw Blocked("common invariant circle at c = " + std::to_string(c), c, r);
    }
    result.probes.emplace_back(c, r);
    return r;
  };

  // Witness word first, the rest of the catalog after it; finite reductions
  // are made lazily at the cohomology of the latest probe.
  std::vector<OperatorWord> order;
  std::vector<std::optional<OperatorWord>> finite;
  double finite_c = c_start;
  auto reorder = [&](const RSpaceReport& r, double c) {
    order.clear();
    order.push_back(r.witness->word);
    for (const OperatorWord& w : catalog) {
      if (!(w == r.witness->word)) order.push_back(w);
    }
    finite.assign(order.size(), std::nullopt);
    finite_c = c;
  };
  auto finite_word = [&](std::size_t i) -> const OperatorWord& {
    if (!finite[i]) finite[i] = finite_reduction(order[i], provider(finite_c), options.probe.solve.closure_retries);
    return *finite[i];
  };

  reorder(probe(c_start), c_start);
  probe(0.5 * (c_start + c_end));
  probe(c_end);

  Pseudograph g{c_start, GridFunction(grid.n, 0.0)};
  int since_probe = 0;
  const double sign = c_end > c_start ? 1.0 : -1.0;

  auto try_words = [&](double delta) -> std::optional<MechanismStep> {
    for (std::size_t i = 0; i < order.size(); ++i) {
      try {
        return mechanism_step(g, finite_word(i), delta, provider, options.mechanism);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoGap && e.code() != ErrorCode::StepTooSmall && e.code() != ErrorCode::ArcTooShort) throw;
      }
    }
    return std::nullopt;
  };

  while (g.c != c_end) {
    if (result.trail.size() >= options.max_steps) {
      throw DiffusionStalled("step budget exhausted at c = " + std::to_string(g.c), std::move(result.trail), g);
    }
    if (since_probe >= options.reprobe_every) {
      try {
        reorder(probe(g.c), g.c);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unresolved) throw;
      }
      since_probe = 0;
    }
    const double remaining = c_end - g.c;
    const double delta = sign * std::min(options.mechanism.eps_step, std::abs(remaining));
    std::optional<MechanismStep> step = try_words(delta);
    if (!step) {
      MechanismStep relax = mechanism_step(g, finite_word(0), 0.0, provider, options.mechanism);
      g = relax.g_after;
      result.trail.push_back(std::move(relax));
      ++result.relaxations;
      step = try_words(delta);
    }
    if (!step) {
      throw DiffusionStalled("no catalog word moves the cohomology from c = " + std::to_string(g.c),
                             std::move(result.trail), g);
    }
    if (step->halvings == 0 && delta == remaining) step->g_after.c = c_end;
    g = step->g_after;
    result.trail.push_back(std::move(*step));
    ++since_probe;
  }

  result.terminal_index = argmin_index(g.u);
  result.raw_orbit = backtrack_orbit(family, result.trail, result.terminal_index, grid.n);
  result.raw_report = verify_polyorbit(family, result.raw_orbit, options.tol_orbit);
  result.orbit = result.raw_orbit;
  result.report = result.raw_report;

  if (options.refine && result.raw_orbit.points.size() > 1) {
    const std::vector<Transition> chain = backtrack_chain(result.trail, result.terminal_index);
    const double dn = static_cast<double>(grid.n);
    std::vector<double> lifted{chain.front().from / dn};
    for (const Transition& t : chain) lifted.push_back(lifted.back() + t.lift / dn);
    const RefineResult ref = refine_orbit(family, result.raw_orbit.labels, lifted, result.raw_orbit.points.front().p,
                                          result.raw_orbit.points.back().p);
    result.refine_defect = ref.max_defect;
    if (ref.converged) {
      double dist = 0.0;
      for (std::size_t k = 0; k < lifted.size(); ++k) dist = std::max(dist, std::abs(ref.lifted[k] - lifted[k]));
      PolyOrbit refined = orbit_from_lift(family, result.raw_orbit.labels, ref.lifted);
      OrbitReport rep = verify_polyorbit(family, refined, options.tol_orbit);
      if (rep.max_residual <= result.report.max_residual) {
        result.orbit = std::move(refined);
        result.report = std::move(rep);
        result.refined = true;
        result.shadow_distance = dist;
      }
    }
  }
  if (!result.report.verified) {
    throw DiffusionStalled("orbit failed verification (max residual " + std::to_string(result.report.max_residual) + ")",
                           std::move(result.trail), g);
  }
  return result;
}

}  // namespace polykam
