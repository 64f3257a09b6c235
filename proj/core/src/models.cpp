#include "polykam/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "polykam/parallel.hpp"

namespace polykam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_signed(double d) { return d - std::round(d); }

}  // namespace

void GridSpec::validate() const {
  if (n < 8) throw Error(ErrorCode::InvalidArgument, "grid needs n >= 8, got " + std::to_string(n));
  if (lift_k < 1) throw Error(ErrorCode::InvalidArgument, "grid needs lift_k >= 1");
}

double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

double circle_distance(double a, double b) { return std::abs(wrap_signed(a - b)); }

double cylinder_distance(const PhasePoint& a, const PhasePoint& b) {
  return std::hypot(circle_distance(a.x, b.x), a.p - b.p);
}

// ------------------------------------------------------------------- potential

double FourierPotential::value(double x) const {
  double v = constant;
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m) v += cos_coeffs[m] * std::cos(kTwoPi * double(m + 1) * x);
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) v += sin_coeffs[m] * std::sin(kTwoPi * double(m + 1) * x);
  return v;
}

double FourierPotential::derivative(double x) const {
  double v = 0.0;
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m) {
    const double w = kTwoPi * double(m + 1);
    v -= cos_coeffs[m] * w * std::sin(w * x);
  }
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) {
    const double w = kTwoPi * double(m + 1);
    v += sin_coeffs[m] * w * std::cos(w * x);
  }
  return v;
}

double FourierPotential::second_derivative(double x) const {
  double v = 0.0;
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m) {
    const double w = kTwoPi * double(m + 1);
    v -= cos_coeffs[m] * w * w * std::cos(w * x);
  }
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) {
    const double w = kTwoPi * double(m + 1);
    v -= sin_coeffs[m] * w * w * std::sin(w * x);
  }
  return v;
}

double FourierPotential::curvature_bound() const {
  double b = 0.0;
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m) b += std::pow(kTwoPi * double(m + 1), 2) * std::abs(cos_coeffs[m]);
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) b += std::pow(kTwoPi * double(m + 1), 2) * std::abs(sin_coeffs[m]);
  return b;
}

double FourierPotential::slope_bound() const {
  double b = 0.0;
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m) b += kTwoPi * double(m + 1) * std::abs(cos_coeffs[m]);
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) b += kTwoPi * double(m + 1) * std::abs(sin_coeffs[m]);
  return b;
}

// ------------------------------------------------------------------- generator

TwistGenerator::TwistGenerator(GeneratorKind kind, double k, FourierPotential potential)
    : kind_(kind), k_(k), potential_(std::move(potential)) {
  for (double v : potential_.cos_coeffs) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidScalar, "potential coefficients must be finite");
  }
  for (double v : potential_.sin_coeffs) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidScalar, "potential coefficients must be finite");
  }
  // The mixed derivative of S is identically -1, so the twist condition
  // holds everywhere; still check it at a few sample points.
  for (int i = 0; i < 8; ++i) {
    const double y = i / 8.0, h = 1e-4;
    const double mixed = (S(y + h, y + h) - S(y + h, y - h) - S(y - h, y + h) + S(y - h, y - h)) / (4 * h * h);
    if (!(mixed < 0.0)) throw Error(ErrorCode::InvalidArgument, "generator violates the twist condition");
  }
}

TwistGenerator TwistGenerator::pure_twist() { return TwistGenerator(GeneratorKind::PureTwist, 0.0, {}); }

TwistGenerator TwistGenerator::standard(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::InvalidScalar, "standard map needs finite k >= 0");
  const double amp = k / (4.0 * std::numbers::pi * std::numbers::pi);
  return TwistGenerator(GeneratorKind::Standard, k, FourierPotential{amp, {-amp}, {}});
}

TwistGenerator TwistGenerator::fourier(FourierPotential potential) {
  return TwistGenerator(GeneratorKind::Fourier, 0.0, std::move(potential));
}

std::string TwistGenerator::name() const {
  std::ostringstream os;
  switch (kind_) {
    case GeneratorKind::PureTwist: os << "pure_twist"; break;
    case GeneratorKind::Standard: os << "standard(k=" << k_ << ")"; break;
    case GeneratorKind::Fourier: os << "fourier"; break;
  }
  return os.str();
}

bool TwistGenerator::operator==(const TwistGenerator& o) const {
  return kind_ == o.kind_ && k_ == o.k_ && potential_.constant == o.potential_.constant &&
         potential_.cos_coeffs == o.potential_.cos_coeffs && potential_.sin_coeffs == o.potential_.sin_coeffs;
}

// ------------------------------------------------------------------------- map

PhasePoint apply_map(const TwistGenerator& gen, const PhasePoint& z) {
  if (gen.kind() == GeneratorKind::Fourier) return apply_map_implicit(gen, z);
  const double p2 = z.p + gen.dV(z.x);
  return {wrap_unit(z.x + p2), p2};
}

double map_target_lift(const TwistGenerator& gen, const PhasePoint& z) {
  const double y = z.x;
  auto f = [&](double x) { return -gen.d1S(y, x) - z.p; };
  // f is increasing with slope 1; expand a bracket around the unforced guess.
  const double reach = 1.0 + gen.potential().slope_bound();
  double lo = y + z.p - reach, hi = y + z.p + reach;
  for (int i = 0; i < 60 && f(lo) > 0.0; ++i) lo -= reach;
  for (int i = 0; i < 60 && f(hi) < 0.0; ++i) hi += reach;
  if (!(f(lo) <= 0.0 && f(hi) >= 0.0)) throw Error(ErrorCode::MapSolveFailed, "could not bracket the map solve");
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  const double h = 1e-6;
  for (int it = 0; it < 50; ++it) {
    const double fx = f(x);
    if (std::abs(fx) <= 1e-12) return x;
    const double slope = (f(x + h) - f(x - h)) / (2 * h);
    if (!(slope > 0.0)) break;
    x -= fx / slope;
  }
  if (std::abs(f(x)) <= 1e-12) return x;
  throw Error(ErrorCode::MapSolveFailed, "Newton did not converge in 50 iterations");
}

PhasePoint apply_map_implicit(const TwistGenerator& gen, const PhasePoint& z) {
  const double x = map_target_lift(gen, z);
  return {wrap_unit(x), gen.d2S(z.x, x)};
}

// ----------------------------------------------------------------------- costs

namespace {

// Fills a dense cost from a per-(displacement, y) kernel, scanning lifts
// k in [-lift_k, lift_k] and checking k = +-(lift_k + 1).
template <class Kernel>
CostMatrix scan_lifts(const GridSpec& grid, const char* what, Kernel kernel) {
  grid.validate();
  const std::size_t n = grid.n;
  const long nn = static_cast<long>(n);
  const long L = grid.lift_k;
  std::vector<double> e(n * n);
  std::vector<std::int32_t> disp(n * n);
  std::vector<int> bad(n, 0);
  parallel_rows(n, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t i = y0; i < y1; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const long base = static_cast<long>(j) - static_cast<long>(i);
        double best = std::numeric_limits<double>::infinity();
        long best_steps = 0;
        for (long k = -L; k <= L; ++k) {
          const long steps = base + k * nn;
          const double v = kernel(i, static_cast<double>(steps) / static_cast<double>(n));
          if (v < best) {
            best = v;
            best_steps = steps;
          }
        }
        for (long k : {-L - 1, L + 1}) {
          if (kernel(i, static_cast<double>(base + k * nn) / static_cast<double>(n)) < best) bad[i] = 1;
        }
        e[i * n + j] = best;
        disp[i * n + j] = static_cast<std::int32_t>(best_steps);
      }
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (bad[i]) {
      throw Error(ErrorCode::LiftWindowTooSmall, std::string(what) + ": minimizing lift outside k in [-" +
                                                     std::to_string(L) + ", " + std::to_string(L) + "] at row " +
                                                     std::to_string(i));
    }
  }
  CostMatrix out(n, std::move(e));
  out.set_displacement(std::move(disp));
  return out;
}

}  // namespace

CostMatrix build_cost_twist(const TwistGenerator& gen, double c, const GridSpec& grid) {
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidScalar, "cohomology must be finite");
  grid.validate();
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) v[i] = gen.V(grid.point(i));
  // S(y, y + d) - c d with the row-constant V(y) added after the lift scan,
  // so generators with V = 0 give exactly circulant costs.
  CostMatrix raw = scan_lifts(grid, "build_cost_twist", [c](std::size_t, double d) { return 0.5 * d * d - c * d; });
  if (gen.kind() == GeneratorKind::PureTwist) return raw;
  std::vector<double> e(raw.entries().begin(), raw.entries().end());
  for (std::size_t i = 0; i < grid.n; ++i) {
    for (std::size_t j = 0; j < grid.n; ++j) e[i * grid.n + j] += v[i];
  }
  CostMatrix out(grid.n, std::move(e));
  out.set_displacement(std::vector<std::int32_t>(raw.displacements().begin(), raw.displacements().end()));
  return out;
}

CostMatrix build_cost_lagrangian(const LagrangianSpec& spec, double c, const GridSpec& grid) {
  if (spec.time_steps < 4) throw Error(ErrorCode::InvalidArgument, "Lagrangian cost needs time_steps >= 4");
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidScalar, "cohomology must be finite");
  const int m = spec.time_steps;
  const double tau = 1.0 / m;
  std::optional<CostMatrix> total;
  for (int s = 0; s < m; ++s) {
    const double t = (s + 0.5) * tau;
    const FourierPotential* pot = nullptr;
    if (!spec.slices.empty()) {
      std::size_t slice = static_cast<std::size_t>(t * static_cast<double>(spec.slices.size()));
      pot = &spec.slices[std::min(slice, spec.slices.size() - 1)];
    }
    CostMatrix step = scan_lifts(grid, "build_cost_lagrangian", [&](std::size_t i, double d) {
      const double mid = grid.point(i) + 0.5 * d;
      const double pv = pot ? pot->value(mid) : 0.0;
      return 0.5 * d * d / tau - tau * pv - c * d;
    });
    total = total ? compose_costs(*total, step) : std::move(step);
  }
  return *total;
}

std::vector<CostMatrix> family_costs(std::span<const TwistGenerator> family, double c, const GridSpec& grid) {
  if (family.empty()) throw Error(ErrorCode::InvalidArgument, "family must be non-empty");
  std::vector<CostMatrix> out;
  out.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    try {
      out.push_back(build_cost_twist(family[i], c, grid));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LiftWindowTooSmall) throw;
      throw Error(ErrorCode::LiftWindowTooSmall, "generator " + std::to_string(i) + " (" + family[i].name() +
                                                     ") at c = " + std::to_string(c));
    }
  }
  return out;
}

}  // namespace polykam
