#pragma once

// Discrete pseudographs G_{c,u}: the graph of c dx + du over the grid.

#include <cstddef>
#include <vector>

#include "polykam/models.hpp"
#include "polykam/tropical.hpp"

namespace polykam {

struct Pseudograph {
  double c = 0.0;
  GridFunction u;  // normalized, min 0

  std::size_t size() const noexcept { return u.size(); }
};

// Cyclic run of grid indices start, start + 1, ..., start + length - 1 (mod n).
struct CyclicArc {
  std::size_t n = 0;
  std::size_t start = 0;
  std::size_t length = 0;

  bool contains(std::size_t i) const;
  std::vector<int> indices() const;
  bool operator==(const CyclicArc&) const = default;
};

struct BumpForm {
  std::vector<double> values;  // nu_i
  CyclicArc support;
  double integral = 0.0;  // (sum nu_i) / n
};

// Indices where u - v lies within tol of its minimum.
ArgminSet wedge(const Pseudograph& g, const Pseudograph& g2, double tol);
// (x_i, c + central difference of u at i) for every wedge index i.
std::vector<PhasePoint> wedge_graph(const Pseudograph& g, const Pseudograph& g2, double tol);

// Momentum c + (u[i+1] - u[i-1]) n / 2 at index i.
double central_momentum(const Pseudograph& g, std::size_t i);

// max_i n^2 (u[i-1] - 2 u[i] + u[i+1]), cyclic.
double semiconcavity_constant(const GridFunction& u);

// (c + integral, u + P) with P[0] = 0, P[i] = sum_{j<i} (nu_j - integral) / n,
// normalized.
Pseudograph pseudograph_sum(const Pseudograph& g, const BumpForm& nu);

bool is_c11_graph(const Pseudograph& g, double bound);

}  // namespace polykam
