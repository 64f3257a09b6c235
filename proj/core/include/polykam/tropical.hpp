#pragma once

// Min-plus algebra over functions and costs on a finite set of points.
//
// A CostMatrix is a dense n x n table a(y, x) read as "cost from y to x".
// Every operator here is the discrete counterpart of a Lax-Oleinik or cost
// operation on the circle; the grid geometry itself lives in models.hpp, this
// file only sees dimensions.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "polykam/error.hpp"

namespace polykam {

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {}
  GridFunction(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double min() const;
  double max() const;
  double oscillation() const { return max() - min(); }

  // Shifted copy with minimum exactly 0.
  GridFunction normalized() const;

  GridFunction operator-(const GridFunction& other) const;
  GridFunction operator+(double shift) const;

  bool operator==(const GridFunction&) const = default;

 private:
  std::vector<double> values_;
};

// (max - min) / 2, the seminorm of functions modulo constants.
double half_oscillation(const GridFunction& u);
// Half oscillation of u - v; zero iff u and v differ by a constant.
double half_oscillation_distance(const GridFunction& u, const GridFunction& v);
double sup_distance(const GridFunction& u, const GridFunction& v);

class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t n, double fill);
  CostMatrix(std::size_t n, std::vector<double> entries);
  // Row-major nested list, e.g. {{1, 4}, {2, 0}}.
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static CostMatrix zeros(std::size_t n) { return CostMatrix(n, 0.0); }
  // 0 on the diagonal, `off` elsewhere.
  static CostMatrix diagonal(std::size_t n, double off);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t y, std::size_t x) const { return entries_[y * n_ + x]; }
  std::span<const double> row(std::size_t y) const { return {entries_.data() + y * n_, n_}; }
  std::span<const double> entries() const noexcept { return entries_; }

  double min_entry() const noexcept { return min_; }
  double max_entry() const noexcept { return max_; }
  double oscillation() const noexcept { return max_ - min_; }

  // Lifted displacement of the minimizing path from y to x, in grid steps
  // (displacement * n). Present for costs built from generators and carried
  // through compose/min/add_constant when every operand has it.
  bool has_displacement() const noexcept { return !displacement_.empty(); }
  std::int32_t displacement(std::size_t y, std::size_t x) const { return displacement_[y * n_ + x]; }
  void set_displacement(std::vector<std::int32_t> steps);
  std::span<const std::int32_t> displacements() const noexcept { return displacement_; }

  bool same_entries(const CostMatrix& other) const { return n_ == other.n_ && entries_ == other.entries_; }

 private:
  void refresh_range();

  std::size_t n_ = 0;
  std::vector<double> entries_;
  std::vector<std::int32_t> displacement_;
  double min_ = 0.0;
  double max_ = 0.0;
};

double max_abs_difference(const CostMatrix& a, const CostMatrix& b);

struct ArgminSet {
  std::size_t n = 0;
  std::vector<int> members;  // sorted, unique

  bool contains(int i) const;
  std::size_t size() const noexcept { return members.size(); }
  bool empty() const noexcept { return members.empty(); }
  bool full() const noexcept { return members.size() == n; }
  bool operator==(const ArgminSet&) const = default;
};

// Indices whose value lies within tol of the minimum.
ArgminSet argmin_within(std::span<const double> values, double tol);

// T_a u(x) = min_y u(y) + a(y, x). Not normalized.
GridFunction lax_oleinik(const CostMatrix& a, const GridFunction& u);
// Same, also filling argmin[x] with the minimizing y (smallest index on ties).
GridFunction lax_oleinik(const CostMatrix& a, const GridFunction& u, std::vector<int>& argmin);
// T^_a u(y) = max_x u(x) - a(y, x).
GridFunction dual_lax_oleinik(const CostMatrix& a, const GridFunction& u);

CostMatrix min_costs(const CostMatrix& a, const CostMatrix& a2);
// (a then a2)(y, x) = min_z a(y, z) + a2(z, x).
CostMatrix compose_costs(const CostMatrix& a, const CostMatrix& a2);
CostMatrix add_constant(const CostMatrix& a, double lam);
// a composed with itself `power` times (power >= 1), by repeated squaring.
CostMatrix tropical_power(const CostMatrix& a, std::int64_t power);

// argmin of u - T^_a T_a u within tol. tol <= 0 selects the default
// 1e-9 * (1 + oscillation of the defect).
ArgminSet argmin_front(const CostMatrix& a, const GridFunction& u, double tol = 0.0);
// Default tolerance used by argmin_front for a given defect function.
double default_argmin_tol(const GridFunction& defect);
// argmin_front with tolerance scale * (1 + oscillation of the defect).
ArgminSet argmin_front_relative(const CostMatrix& a, const GridFunction& u, double scale);

// Minus the minimum cycle mean (Karp).
double tropical_eigenvalue(const CostMatrix& a);
// -(min entry of a^n)/n for n = max_power, computed by squaring; a slow
// cross-check of tropical_eigenvalue.
double power_growth_eigenvalue(const CostMatrix& a, std::int64_t max_power);

struct ClosureConfig {
  std::int64_t transient = 0;  // 0: 4n
  std::int64_t window = 0;     // 0: 2n
  double tol = 1e-9;
};

struct ClosureDiagnostics {
  bool certified = false;
  double max_change = 0.0;  // sup change when a second window is appended
  std::int64_t transient = 0;
  std::int64_t window = 0;
  // Power at which each entry of h is attained, row-major.
  std::vector<std::int64_t> achieving_power;
  // Smallest power of two whose power of b matches h within tol, or, when
  // none does, the most common achieving power.
  std::int64_t best_power = 0;
  double best_power_deviation = 0.0;
};

struct PeierlsClosure {
  CostMatrix base;  // the cost a
  CostMatrix h;
  double alpha = 0.0;
  ClosureDiagnostics diagnostics;
};

class NotStabilized : public Error {
 public:
  NotStabilized(const std::string& what, PeierlsClosure partial)
      : Error(ErrorCode::NotStabilized, what), partial_(std::move(partial)) {}
  const PeierlsClosure& partial() const noexcept { return partial_; }

 private:
  PeierlsClosure partial_;
};

// liminf of (a + alpha)^n as a windowed minimum over [transient, transient + window].
PeierlsClosure peierls_closure(const CostMatrix& a, const ClosureConfig& config = {});

// sup |T_a u + alpha - u|.
double fixed_point_residual(const CostMatrix& a, double alpha, const GridFunction& u);

// Normalized T_h seed; throws NotFixed when it is not a fixed point of
// T_base + alpha within tol_fix.
GridFunction weak_kam_from_barrier(const PeierlsClosure& closure, const GridFunction& seed,
                                   double tol_fix = 1e-8);

}  // namespace polykam
