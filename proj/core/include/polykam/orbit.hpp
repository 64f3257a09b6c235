#pragma once

// Polyorbits of a family of twist maps: assembly from lifted positions,
// verification against the exact maps, and Newton refinement of a pseudo
// orbit into a nearby true orbit.

#include <cstddef>
#include <span>
#include <vector>

#include "polykam/models.hpp"

namespace polykam {

struct PolyOrbit {
  std::vector<PhasePoint> points;
  std::vector<int> labels;         // generator per transition
  std::vector<double> residuals;   // per transition

  std::size_t transitions() const noexcept { return labels.size(); }
};

struct OrbitReport {
  bool verified = true;
  double max_residual = 0.0;
  std::vector<double> residuals;
};

// Residual of transition k: cylinder distance between apply_map(labels[k],
// points[k]) and points[k + 1]. Never throws on bad data; a malformed orbit
// is reported unverified with infinite residual.
OrbitReport verify_polyorbit(std::span<const TwistGenerator> family, const PolyOrbit& orbit, double tol);

// Phase points from lifted positions X_0..X_N: p_0 = -d1S(X_0, X_1) and
// p_k = d2S(X_{k-1}, X_k), with residuals filled against the maps.
PolyOrbit orbit_from_lift(std::span<const TwistGenerator> family, std::span<const int> labels,
                          std::span<const double> lifted);

struct RefineOptions {
  int max_iter = 40;
  double tol = 1e-12;
};

struct RefineResult {
  bool converged = false;
  int iterations = 0;
  double max_defect = 0.0;      // sup of the Euler-Lagrange and boundary defects
  std::vector<double> lifted;   // refined positions
};

// Newton iteration on the discrete Euler-Lagrange equations
//   d2S_{k-1}(X_{k-1}, X_k) + d1S_k(X_k, X_{k+1}) = 0,  0 < k < N,
// with boundary momenta -d1S_0(X_0, X_1) = p_start and d2S_{N-1} = p_end.
// The Jacobian is tridiagonal; each step is damped by backtracking.
RefineResult refine_orbit(std::span<const TwistGenerator> family, std::span<const int> labels,
                          std::span<const double> lifted, double p_start, double p_end, const RefineOptions& options = {});

}  // namespace polykam
