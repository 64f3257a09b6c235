#include "polykam/tropical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "polykam/parallel.hpp"

namespace polykam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::GridMismatch,
                std::string(what) + ": sizes " + std::to_string(a) + " and " + std::to_string(b));
  }
}

// C = A (x) B in the min-plus sense. If arg is non-null it receives the
// minimizing z for every entry; ties keep the smallest z.
void minplus_product(const double* a, const double* b, double* c, std::int32_t* arg, std::size_t n) {
  parallel_rows(n, [=](std::size_t y0, std::size_t y1) {
    std::vector<double> zarg(arg ? n : 0);
    for (std::size_t y = y0; y < y1; ++y) {
      double* out = c + y * n;
      std::fill(out, out + n, kInf);
      if (arg) {
        std::fill(zarg.begin(), zarg.end(), 0.0);
        double* za = zarg.data();
        for (std::size_t z = 0; z < n; ++z) {
          const double ayz = a[y * n + z];
          const double* bz = b + z * n;
          const double zf = static_cast<double>(z);
          for (std::size_t x = 0; x < n; ++x) {
            const double s = ayz + bz[x];
            const bool lt = s < out[x];
            out[x] = lt ? s : out[x];
            za[x] = lt ? zf : za[x];
          }
        }
        for (std::size_t x = 0; x < n; ++x) arg[y * n + x] = static_cast<std::int32_t>(za[x]);
      } else {
        for (std::size_t z = 0; z < n; ++z) {
          const double ayz = a[y * n + z];
          const double* bz = b + z * n;
          for (std::size_t x = 0; x < n; ++x) {
            const double s = ayz + bz[x];
            out[x] = s < out[x] ? s : out[x];
          }
        }
      }
    }
  });
}

struct Dense {
  std::size_t n = 0;
  std::vector<double> v;
};

Dense product(const Dense& a, const Dense& b) {
  Dense c{a.n, std::vector<double>(a.n * a.n)};
  minplus_product(a.v.data(), b.v.data(), c.v.data(), nullptr, a.n);
  return c;
}

// Dense matrix together with the path length attaining each entry.
struct Tracked {
  Dense m;
  std::vector<std::int64_t> len;
};

Tracked product(const Tracked& a, const Tracked& b) {
  const std::size_t n = a.m.n;
  Tracked c{{n, std::vector<double>(n * n)}, std::vector<std::int64_t>(n * n)};
  std::vector<std::int32_t> arg(n * n);
  minplus_product(a.m.v.data(), b.m.v.data(), c.m.v.data(), arg.data(), n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t z = static_cast<std::size_t>(arg[y * n + x]);
      c.len[y * n + x] = a.len[y * n + z] + b.len[z * n + x];
    }
  }
  return c;
}

template <class M>
M binary_power(const M& base, std::int64_t power) {
  std::optional<M> result;
  M square = base;
  while (power > 0) {
    if (power & 1) result = result ? product(*result, square) : square;
    power >>= 1;
    if (power > 0) square = product(square, square);
  }
  return *result;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

// ---------------------------------------------------------------- GridFunction

double GridFunction::min() const {
  if (values_.empty()) throw Error(ErrorCode::InvalidArgument, "min of empty function");
  return *std::min_element(values_.begin(), values_.end());
}

double GridFunction::max() const {
  if (values_.empty()) throw Error(ErrorCode::InvalidArgument, "max of empty function");
  return *std::max_element(values_.begin(), values_.end());
}

GridFunction GridFunction::normalized() const {
  GridFunction out = *this;
  const double m = min();
  for (double& v : out.values_) v -= m;
  return out;
}

GridFunction GridFunction::operator-(const GridFunction& other) const {
  require_same(size(), other.size(), "function difference");
  GridFunction out = *this;
  for (std::size_t i = 0; i < size(); ++i) out.values_[i] -= other.values_[i];
  return out;
}

GridFunction GridFunction::operator+(double shift) const {
  GridFunction out = *this;
  for (double& v : out.values_) v += shift;
  return out;
}

double half_oscillation(const GridFunction& u) { return 0.5 * u.oscillation(); }

double half_oscillation_distance(const GridFunction& u, const GridFunction& v) {
  return half_oscillation(u - v);
}

double sup_distance(const GridFunction& u, const GridFunction& v) {
  require_same(u.size(), v.size(), "sup distance");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - v[i]));
  return d;
}

// ------------------------------------------------------------------ CostMatrix

CostMatrix::CostMatrix(std::size_t n, double fill) : n_(n), entries_(n * n, fill) { refresh_range(); }

CostMatrix::CostMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_) {
    throw Error(ErrorCode::GridMismatch, "cost entries do not form an n x n table");
  }
  refresh_range();
}

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
  entries_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) throw Error(ErrorCode::GridMismatch, "cost rows must be square");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
  refresh_range();
}

CostMatrix CostMatrix::diagonal(std::size_t n, double off) {
  CostMatrix m(n, off);
  for (std::size_t i = 0; i < n; ++i) m.entries_[i * n + i] = 0.0;
  m.refresh_range();
  return m;
}

void CostMatrix::set_displacement(std::vector<std::int32_t> steps) {
  if (!steps.empty() && steps.size() != n_ * n_) {
    throw Error(ErrorCode::GridMismatch, "displacement table has wrong size");
  }
  displacement_ = std::move(steps);
}

void CostMatrix::refresh_range() {
  if (n_ == 0) throw Error(ErrorCode::InvalidArgument, "empty cost");
  min_ = kInf;
  max_ = -kInf;
  for (double v : entries_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidScalar, "cost entries must be finite");
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
  }
}

double max_abs_difference(const CostMatrix& a, const CostMatrix& b) {
  require_same(a.size(), b.size(), "cost difference");
  double d = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) d = std::max(d, std::abs(a.entries()[i] - b.entries()[i]));
  return d;
}

// ------------------------------------------------------------------- ArgminSet

bool ArgminSet::contains(int i) const { return std::binary_search(members.begin(), members.end(), i); }

ArgminSet argmin_within(std::span<const double> values, double tol) {
  ArgminSet out{values.size(), {}};
  if (values.empty()) return out;
  const double m = *std::min_element(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] - m <= tol) out.members.push_back(static_cast<int>(i));
  }
  return out;
}

// ------------------------------------------------------------ Lax-Oleinik pair

GridFunction lax_oleinik(const CostMatrix& a, const GridFunction& u) {
  require_same(a.size(), u.size(), "lax_oleinik");
  const std::size_t n = a.size();
  GridFunction out(n, kInf);
  double* r = out.values().data();
  for (std::size_t y = 0; y < n; ++y) {
    const double uy = u[y];
    const double* row = a.row(y).data();
    for (std::size_t x = 0; x < n; ++x) {
      const double s = uy + row[x];
      r[x] = s < r[x] ? s : r[x];
    }
  }
  return out;
}

GridFunction lax_oleinik(const CostMatrix& a, const GridFunction& u, std::vector<int>& argmin) {
  require_same(a.size(), u.size(), "lax_oleinik");
  const std::size_t n = a.size();
  GridFunction out(n, kInf);
  std::vector<double> arg(n, 0.0);
  double* r = out.values().data();
  double* ar = arg.data();
  for (std::size_t y = 0; y < n; ++y) {
    const double uy = u[y];
    const double yf = static_cast<double>(y);
    const double* row = a.row(y).data();
    for (std::size_t x = 0; x < n; ++x) {
      const double s = uy + row[x];
      const bool lt = s < r[x];
      r[x] = lt ? s : r[x];
      ar[x] = lt ? yf : ar[x];
    }
  }
  argmin.resize(n);
  for (std::size_t x = 0; x < n; ++x) argmin[x] = static_cast<int>(ar[x]);
  return out;
}

GridFunction dual_lax_oleinik(const CostMatrix& a, const GridFunction& u) {
  require_same(a.size(), u.size(), "dual_lax_oleinik");
  const std::size_t n = a.size();
  GridFunction out(n);
  for (std::size_t y = 0; y < n; ++y) {
    const double* row = a.row(y).data();
    double best = -kInf;
    for (std::size_t x = 0; x < n; ++x) {
      const double s = u[x] - row[x];
      best = s > best ? s : best;
    }
    out[y] = best;
  }
  return out;
}

// ------------------------------------------------------------- cost operations

CostMatrix min_costs(const CostMatrix& a, const CostMatrix& a2) {
  require_same(a.size(), a2.size(), "min_costs");
  const std::size_t n = a.size();
  std::vector<double> e(n * n);
  const bool disp = a.has_displacement() && a2.has_displacement();
  std::vector<std::int32_t> d(disp ? n * n : 0);
  for (std::size_t i = 0; i < n * n; ++i) {
    const bool second = a2.entries()[i] < a.entries()[i];
    e[i] = second ? a2.entries()[i] : a.entries()[i];
    if (disp) d[i] = second ? a2.displacements()[i] : a.displacements()[i];
  }
  CostMatrix out(n, std::move(e));
  if (disp) out.set_displacement(std::move(d));
  return out;
}

CostMatrix compose_costs(const CostMatrix& a, const CostMatrix& a2) {
  require_same(a.size(), a2.size(), "compose_costs");
  const std::size_t n = a.size();
  std::vector<double> e(n * n);
  const bool disp = a.has_displacement() && a2.has_displacement();
  if (!disp) {
    minplus_product(a.entries().data(), a2.entries().data(), e.data(), nullptr, n);
    return CostMatrix(n, std::move(e));
  }
  std::vector<std::int32_t> arg(n * n), d(n * n);
  minplus_product(a.entries().data(), a2.entries().data(), e.data(), arg.data(), n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t z = static_cast<std::size_t>(arg[y * n + x]);
      d[y * n + x] = a.displacement(y, z) + a2.displacement(z, x);
    }
  }
  CostMatrix out(n, std::move(e));
  out.set_displacement(std::move(d));
  return out;
}

CostMatrix add_constant(const CostMatrix& a, double lam) {
  if (!std::isfinite(lam)) throw Error(ErrorCode::InvalidScalar, "add_constant needs a finite shift");
  std::vector<double> e(a.entries().begin(), a.entries().end());
  for (double& v : e) v += lam;
  CostMatrix out(a.size(), std::move(e));
  if (a.has_displacement()) {
    out.set_displacement(std::vector<std::int32_t>(a.displacements().begin(), a.displacements().end()));
  }
  return out;
}

CostMatrix tropical_power(const CostMatrix& a, std::int64_t power) {
  if (power < 1) throw Error(ErrorCode::InvalidArgument, "tropical_power needs power >= 1");
  std::optional<CostMatrix> result;
  CostMatrix square = a;
  while (power > 0) {
    if (power & 1) result = result ? compose_costs(*result, square) : square;
    power >>= 1;
    if (power > 0) square = compose_costs(square, square);
  }
  return *result;
}

// ---------------------------------------------------------------- argmin front

double default_argmin_tol(const GridFunction& defect) { return 1e-9 * (1.0 + defect.oscillation()); }

ArgminSet argmin_front_relative(const CostMatrix& a, const GridFunction& u, double scale) {
  require_same(a.size(), u.size(), "argmin_front");
  const GridFunction defect = u - dual_lax_oleinik(a, lax_oleinik(a, u));
  return argmin_within(defect.values(), scale * (1.0 + defect.oscillation()));
}

ArgminSet argmin_front(const CostMatrix& a, const GridFunction& u, double tol) {
  require_same(a.size(), u.size(), "argmin_front");
  const GridFunction defect = u - dual_lax_oleinik(a, lax_oleinik(a, u));
  if (tol <= 0.0) tol = default_argmin_tol(defect);
  return argmin_within(defect.values(), tol);
}

// ---------------------------------------------------------------- eigenvalue

double tropical_eigenvalue(const CostMatrix& a) {
  const std::size_t n = a.size();
  // walk[k][v]: least weight of a walk with exactly k edges ending at v,
  // starting anywhere.
  std::vector<double> walk((n + 1) * n, kInf);
  std::fill(walk.begin(), walk.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double* prev = walk.data() + (k - 1) * n;
    double* cur = walk.data() + k * n;
    for (std::size_t u = 0; u < n; ++u) {
      const double du = prev[u];
      const double* row = a.row(u).data();
      for (std::size_t v = 0; v < n; ++v) {
        const double s = du + row[v];
        cur[v] = s < cur[v] ? s : cur[v];
      }
    }
  }
  double best = kInf;
  const double* last = walk.data() + n * n;
  for (std::size_t v = 0; v < n; ++v) {
    double worst = -kInf;
    for (std::size_t k = 0; k < n; ++k) {
      worst = std::max(worst, (last[v] - walk[k * n + v]) / static_cast<double>(n - k));
    }
    best = std::min(best, worst);
  }
  return -best;
}

double power_growth_eigenvalue(const CostMatrix& a, std::int64_t max_power) {
  const CostMatrix p = tropical_power(a, max_power);
  return -p.min_entry() / static_cast<double>(max_power);
}

// ------------------------------------------------------------ Peierls closure

PeierlsClosure peierls_closure(const CostMatrix& a, const ClosureConfig& config) {
  const std::size_t n = a.size();
  const double alpha = tropical_eigenvalue(a);
  const std::int64_t transient = config.transient > 0 ? config.transient : static_cast<std::int64_t>(4 * n);
  const std::int64_t window = config.window > 0 ? config.window : static_cast<std::int64_t>(2 * n);

  Dense b{n, std::vector<double>(a.entries().begin(), a.entries().end())};
  for (double& v : b.v) v += alpha;

  // Squares b^(2^k) up to transient + window; they yield b^transient and the
  // candidates for the best single power.
  std::vector<Dense> squares{b};
  for (std::int64_t p = 2; p <= transient + window; p *= 2) squares.push_back(product(squares.back(), squares.back()));
  std::optional<Dense> head;
  for (std::size_t k = 0; k < squares.size(); ++k) {
    if ((transient >> k) & 1) head = head ? product(*head, squares[k]) : squares[k];
  }

  // (I + b)^window = min_{0 <= k <= window} b^k; its diagonal min(0, b_ii)
  // keeps it finite.
  Tracked step{b, std::vector<std::int64_t>(n * n, 1)};
  for (std::size_t i = 0; i < n; ++i) {
    if (0.0 <= step.m.v[i * n + i]) {
      step.m.v[i * n + i] = 0.0;
      step.len[i * n + i] = 0;
    }
  }
  const Tracked spread = binary_power(step, window);
  const Tracked head_t{*head, std::vector<std::int64_t>(n * n, transient)};
  const Tracked h1 = product(head_t, spread);
  const Dense h2 = product(h1.m, spread.m);

  PeierlsClosure out;
  out.base = a;
  out.alpha = alpha;
  out.h = CostMatrix(n, h1.m.v);
  ClosureDiagnostics& diag = out.diagnostics;
  diag.transient = transient;
  diag.window = window;
  diag.max_change = max_abs_diff(h1.m.v, h2.v);
  diag.certified = diag.max_change <= config.tol;
  diag.achieving_power = h1.len;

  diag.best_power = 0;
  for (std::size_t k = 0; k < squares.size(); ++k) {
    const double dev = max_abs_diff(squares[k].v, h1.m.v);
    if (dev <= config.tol) {
      diag.best_power = std::int64_t{1} << k;
      diag.best_power_deviation = dev;
      break;
    }
  }
  if (diag.best_power == 0) {
    std::map<std::int64_t, std::size_t> freq;
    for (std::int64_t p : h1.len) ++freq[p];
    std::size_t top = 0;
    for (const auto& [p, count] : freq) {
      if (count > top) {
        top = count;
        diag.best_power = p;
      }
    }
    diag.best_power_deviation = max_abs_diff(binary_power(b, diag.best_power).v, h1.m.v);
  }

  if (!diag.certified) {
    throw NotStabilized("windowed minimum moved by " + std::to_string(diag.max_change) + " > tol " +
                            std::to_string(config.tol) + " (transient " + std::to_string(transient) +
                            ", window " + std::to_string(window) + ")",
                        std::move(out));
  }
  return out;
}

double fixed_point_residual(const CostMatrix& a, double alpha, const GridFunction& u) {
  const GridFunction image = lax_oleinik(a, u) + alpha;
  return sup_distance(image, u);
}

GridFunction weak_kam_from_barrier(const PeierlsClosure& closure, const GridFunction& seed, double tol_fix) {
  const GridFunction u = lax_oleinik(closure.h, seed).normalized();
  const double residual = fixed_point_residual(closure.base, closure.alpha, u);
  if (!(residual <= tol_fix)) {
    throw Error(ErrorCode::NotFixed, "fixed-point residual " + std::to_string(residual) + " above " +
                                         std::to_string(tol_fix));
  }
  return u;
}

}  // namespace polykam
