#include "polykam/pseudograph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polykam {

namespace {

void require_same_c(const Pseudograph& g, const Pseudograph& g2) {
  if (std::abs(g.c - g2.c) > 1e-12) {
    throw Error(ErrorCode::CohomologyMismatch,
                "wedge needs equal cohomology, got " + std::to_string(g.c) + " and " + std::to_string(g2.c));
  }
  if (g.size() != g2.size()) throw Error(ErrorCode::GridMismatch, "wedge of functions on different grids");
}

}  // namespace

bool CyclicArc::contains(std::size_t i) const {
  if (n == 0) return false;
  return (i + n - start) % n < length;
}

std::vector<int> CyclicArc::indices() const {
  std::vector<int> out;
  out.reserve(length);
  for (std::size_t k = 0; k < length; ++k) out.push_back(static_cast<int>((start + k) % n));
  return out;
}

ArgminSet wedge(const Pseudograph& g, const Pseudograph& g2, double tol) {
  require_same_c(g, g2);
  const GridFunction diff = g.u - g2.u;
  return argmin_within(diff.values(), tol);
}

double central_momentum(const Pseudograph& g, std::size_t i) {
  const std::size_t n = g.size();
  const double up = g.u[(i + 1) % n], down = g.u[(i + n - 1) % n];
  return g.c + (up - down) * static_cast<double>(n) / 2.0;
}

std::vector<PhasePoint> wedge_graph(const Pseudograph& g, const Pseudograph& g2, double tol) {
  const ArgminSet set = wedge(g, g2, tol);
  std::vector<PhasePoint> out;
  out.reserve(set.size());
  const double n = static_cast<double>(g.size());
  for (int i : set.members) out.push_back({i / n, central_momentum(g, static_cast<std::size_t>(i))});
  return out;
}

double semiconcavity_constant(const GridFunction& u) {
  const std::size_t n = u.size();
  if (n < 3) return 0.0;
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = u[(i + n - 1) % n] - 2.0 * u[i] + u[(i + 1) % n];
    best = std::max(best, n2 * d2);
  }
  return best;
}

Pseudograph pseudograph_sum(const Pseudograph& g, const BumpForm& nu) {
  const std::size_t n = g.size();
  if (nu.values.size() != n) throw Error(ErrorCode::GridMismatch, "bump form and pseudograph grids differ");
  Pseudograph out{g.c + nu.integral, g.u};
  double acc = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 1; i < n; ++i) {
    acc += (nu.values[i - 1] - nu.integral) / dn;
    out.u[i] += acc;
  }
  out.u = out.u.normalized();
  return out;
}

bool is_c11_graph(const Pseudograph& g, double bound) {
  GridFunction neg = g.u;
  for (double& v : neg.values()) v = -v;
  return semiconcavity_constant(g.u) <= bound && semiconcavity_constant(neg) <= bound;
}

}  // namespace polykam
