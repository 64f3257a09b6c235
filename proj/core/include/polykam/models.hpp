#pragma once

// Twist maps of the cylinder given by generating functions
//   S(y, x) = (x - y)^2 / 2 + V(y)
// on the cover, with time-one map (y, p) -> (y + p + V'(y), p + V'(y)),
// and the costs they induce on a uniform grid of the circle.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polykam/tropical.hpp"

namespace polykam {

struct GridSpec {
  std::size_t n = 256;
  int lift_k = 2;

  // Throws InvalidArgument unless n >= 8 and lift_k >= 1.
  void validate() const;
  double point(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n); }
  bool operator==(const GridSpec&) const = default;
};

struct PhasePoint {
  double x = 0.0;  // in [0, 1)
  double p = 0.0;
};

// Reduces x to [0, 1).
double wrap_unit(double x);
// Distance on R/Z.
double circle_distance(double a, double b);
// Cylinder distance: circle metric in x, absolute difference in p.
double cylinder_distance(const PhasePoint& a, const PhasePoint& b);

// Periodic potential sum_m a_m cos(2 pi m x) + b_m sin(2 pi m x), m >= 1,
// plus a constant.
struct FourierPotential {
  double constant = 0.0;
  std::vector<double> cos_coeffs;  // a_1, a_2, ...
  std::vector<double> sin_coeffs;  // b_1, b_2, ...

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  // sum_m (2 pi m)^2 (|a_m| + |b_m|), an upper bound for |V''|.
  double curvature_bound() const;
  // sum_m 2 pi m (|a_m| + |b_m|), an upper bound for |V'|.
  double slope_bound() const;
};

enum class GeneratorKind { PureTwist, Standard, Fourier };

class TwistGenerator {
 public:
  static TwistGenerator pure_twist();
  // V(x) = k / (4 pi^2) (1 - cos 2 pi x).
  static TwistGenerator standard(double k);
  static TwistGenerator fourier(FourierPotential potential);

  GeneratorKind kind() const noexcept { return kind_; }
  double k() const noexcept { return k_; }
  const FourierPotential& potential() const noexcept { return potential_; }
  std::string name() const;

  double V(double x) const { return potential_.value(x); }
  double dV(double x) const { return potential_.derivative(x); }
  double d2V(double x) const { return potential_.second_derivative(x); }

  // Generating function on the cover and its partial derivatives.
  double S(double y, double x) const { return 0.5 * (x - y) * (x - y) + V(y); }
  double d1S(double y, double x) const { return -(x - y) + dV(y); }
  double d2S(double y, double x) const { return x - y; }

  // Upper bound on discrete second differences of built costs: 1 + max|V''|.
  double sc_bound() const { return 1.0 + potential_.curvature_bound(); }

  bool operator==(const TwistGenerator&) const;

 private:
  TwistGenerator(GeneratorKind kind, double k, FourierPotential potential);

  GeneratorKind kind_;
  double k_;
  FourierPotential potential_;
};

// Time-one map. Pure-twist and standard generators use the closed form,
// Fourier generators the implicit solve.
PhasePoint apply_map(const TwistGenerator& gen, const PhasePoint& z);
// Solves p = -d1S(y, x) for x on the cover by bracketing, bisection and
// Newton (tolerance 1e-12, at most 50 Newton iterations), then returns
// (x mod 1, d2S(y, x)). Throws MapSolveFailed.
PhasePoint apply_map_implicit(const TwistGenerator& gen, const PhasePoint& z);
// Lifted target of the map: the solution x on the cover, not reduced.
double map_target_lift(const TwistGenerator& gen, const PhasePoint& z);

// entry[y][x] = min over k in [-lift_k, lift_k] of S(y, x + k) - c (x + k - y),
// with the minimizing displacement recorded. Throws LiftWindowTooSmall when
// a lift just outside the window would be strictly cheaper.
CostMatrix build_cost_twist(const TwistGenerator& gen, double c, const GridSpec& grid);

struct LagrangianSpec {
  // Time slices of V(x, t); slice s covers t in [s/S, (s+1)/S). Empty means V = 0.
  std::vector<FourierPotential> slices;
  int time_steps = 16;  // m >= 4
};

// Midpoint-rule action of L = v^2/2 - V(x, t) over m sub-steps of length
// 1/m, composed in time order.
CostMatrix build_cost_lagrangian(const LagrangianSpec& spec, double c, const GridSpec& grid);

std::vector<CostMatrix> family_costs(std::span<const TwistGenerator> family, double c, const GridSpec& grid);

}  // namespace polykam
