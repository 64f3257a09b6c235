#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "polykam/models.hpp"
#include "polykam/operator_word.hpp"

namespace polykam::cli {

struct RunConfig {
  std::vector<TwistGenerator> family;
  GridSpec grid;

  double tol_fix = 1e-8;
  double tol_orbit = 1e-3;
  double tol_argmin = 1e-9;  // relative: tolerance is tol_argmin * (1 + oscillation of the defect)
  double dedupe_tol = 1e-6;

  double eps_step = 0.05;
  double delta_min = 1e-4;
  std::size_t gap_min = 0;      // 0: max(4, n / 32)
  std::int64_t transient = 0;   // 0: 4n
  std::int64_t window = 0;      // 0: 2n

  std::size_t seed_count = 5;
  std::uint64_t rng_seed = 1;

  std::vector<OperatorWord> catalog;  // empty: default catalog
};

// Parses a JSON document. Unknown keys and type or range violations throw
// ConfigError naming the key path, e.g. "grid.n".
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// JSON Schema (draft 2020-12) of the accepted document.
const char* config_schema();

}  // namespace polykam::cli
