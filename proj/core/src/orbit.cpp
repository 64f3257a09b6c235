#include "polykam/orbit.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace polykam {

OrbitReport verify_polyorbit(std::span<const TwistGenerator> family, const PolyOrbit& orbit, double tol) {
  OrbitReport r;
  if (orbit.points.size() <= 1) return r;
  const std::size_t steps = orbit.points.size() - 1;
  if (orbit.labels.size() != steps) {
    r.verified = false;
    r.max_residual = std::numeric_limits<double>::infinity();
    return r;
  }
  r.residuals.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const int g = orbit.labels[k];
    double res = std::numeric_limits<double>::infinity();
    if (g >= 0 && static_cast<std::size_t>(g) < family.size()) {
      try {
        res = cylinder_distance(apply_map(family[static_cast<std::size_t>(g)], orbit.points[k]), orbit.points[k + 1]);
      } catch (const Error&) {
      }
    }
    if (!std::isfinite(res)) res = std::numeric_limits<double>::infinity();
    r.residuals[k] = res;
    r.max_residual = std::max(r.max_residual, res);
  }
  r.verified = r.max_residual <= tol;
  return r;
}

PolyOrbit orbit_from_lift(std::span<const TwistGenerator> family, std::span<const int> labels,
                          std::span<const double> lifted) {
  PolyOrbit o;
  if (lifted.empty()) return o;
  if (labels.size() + 1 != lifted.size()) throw Error(ErrorCode::InvalidArgument, "orbit needs one label per transition");
  o.labels.assign(labels.begin(), labels.end());
  const std::size_t N = labels.size();
  o.points.resize(N + 1);
  if (N == 0) {
    o.points[0] = {wrap_unit(lifted[0]), 0.0};
    return o;
  }
  const auto& g0 = family[static_cast<std::size_t>(labels[0])];
  o.points[0] = {wrap_unit(lifted[0]), -g0.d1S(lifted[0], lifted[1])};
  for (std::size_t k = 1; k <= N; ++k) {
    const auto& g = family[static_cast<std::size_t>(labels[k - 1])];
    o.points[k] = {wrap_unit(lifted[k]), g.d2S(lifted[k - 1], lifted[k])};
  }
  o.residuals = verify_polyorbit(family, o, std::numeric_limits<double>::infinity()).residuals;
  return o;
}

namespace {

void defects(std::span<const TwistGenerator> family, std::span<const int> labels, const std::vector<double>& X,
             double p_start, double p_end, std::vector<double>& E) {
  const std::size_t N = labels.size();
  E.assign(N + 1, 0.0);
  auto gen = [&](std::size_t k) -> const TwistGenerator& { return family[static_cast<std::size_t>(labels[k])]; };
  E[0] = -gen(0).d1S(X[0], X[1]) - p_start;
  for (std::size_t k = 1; k < N; ++k) E[k] = gen(k - 1).d2S(X[k - 1], X[k]) + gen(k).d1S(X[k], X[k + 1]);
  E[N] = gen(N - 1).d2S(X[N - 1], X[N]) - p_end;
}

double sup(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

RefineResult refine_orbit(std::span<const TwistGenerator> family, std::span<const int> labels,
                          std::span<const double> lifted, double p_start, double p_end, const RefineOptions& options) {
  RefineResult r;
  r.lifted.assign(lifted.begin(), lifted.end());
  const std::size_t N = labels.size();
  if (N == 0 || lifted.size() != N + 1) {
    r.converged = N == 0;
    return r;
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= family.size()) throw Error(ErrorCode::InvalidArgument, "label outside family");
  }
  auto gen = [&](std::size_t k) -> const TwistGenerator& { return family[static_cast<std::size_t>(labels[k])]; };

  std::vector<double>& X = r.lifted;
  std::vector<double> E, trialE, trial;
  defects(family, labels, X, p_start, p_end, E);
  double norm = sup(E);
  const std::size_t m = N + 1;
  std::vector<double> lower(m - 1), diag(m), upper(m - 1), rhs(m);
  for (r.iterations = 0; r.iterations < options.max_iter && norm > options.tol; ++r.iterations) {
    // S_k(a, b) = (b - a)^2 / 2 + V_k(a): d1S = a - b + V_k'(a), d2S = b - a.
    diag[0] = -1.0 - gen(0).d2V(X[0]);
    upper[0] = 1.0;
    for (std::size_t k = 1; k < N; ++k) {
      lower[k - 1] = -1.0;
      diag[k] = 2.0 + gen(k).d2V(X[k]);
      upper[k] = -1.0;
    }
    lower[N - 1] = -1.0;
    diag[N] = 1.0;
    for (std::size_t k = 0; k < m; ++k) rhs[k] = -E[k];
    const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(m), 1, lower.data(), diag.data(),
                                          upper.data(), rhs.data(), static_cast<lapack_int>(m));
    if (info != 0) break;
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      trial = X;
      for (std::size_t k = 0; k < m; ++k) trial[k] += step * rhs[k];
      defects(family, labels, trial, p_start, p_end, trialE);
      const double tn = sup(trialE);
      if (tn < norm) {
        X.swap(trial);
        E.swap(trialE);
        norm = tn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  r.max_defect = norm;
  r.converged = norm <= options.tol;
  return r;
}

}  // namespace polykam
