#pragma once

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "polykam/tropical.hpp"

namespace polykam::testing {

inline CostMatrix random_cost(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> e(n * n);
  for (double& v : e) v = unif(rng);
  return CostMatrix(n, std::move(e));
}

inline GridFunction random_function(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = unif(rng);
  return GridFunction(std::move(v));
}

inline double sup_norm(const GridFunction& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace polykam::testing



#define EXPECT_POLYKAM_ERROR(stmt, expected_code)                                  \
  do {                                                                             \
    bool thrown_ = false;                                                          \
    try {                                                                          \
      stmt;                                                                        \
    } catch (const ::polykam::Error& e_) {                                         \
      thrown_ = true;                                                              \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                            \
    }                                                                              \
    EXPECT_TRUE(thrown_) << "expected " << ::polykam::code_name(expected_code);    \
  } while (false)
