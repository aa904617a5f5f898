#pragma once

#include <cmath>
#include <vector>

#include "smp/factor.hpp"
#include "smp/model.hpp"
#include "smp/rng.hpp"

namespace fixtures {

using smp::DenseFactor;
using smp::Scope;

// f(A) = [2, 1]
inline DenseFactor f_a() { return DenseFactor({0}, {2}, {2, 1}); }
// g(A, B) = [[1, 3], [2, 0]]
inline DenseFactor g_ab() { return DenseFactor({0, 1}, {2, 2}, {1, 3, 2, 0}); }
// F1(A, B) = {00 -> 3, 01 -> 3, 10 -> 2, 11 -> 0}
inline DenseFactor f1() { return DenseFactor({0, 1}, {2, 2}, {3, 3, 2, 0}); }

// Two binary variables with Z = 10.
inline smp::GraphicalModel two_var_model() { return smp::GraphicalModel({2, 2}, {f_a(), g_ab()}); }

inline DenseFactor random_factor(smp::Rng& rng, const Scope& scope, const std::vector<int>& cards,
                                 double zero_probability = 0.0) {
  DenseFactor f = DenseFactor::constant(scope, cards, 0.0);
  for (double& v : f.mutable_values()) v = rng.uniform() < zero_probability ? 0.0 : rng.uniform(0.1, 3.0);
  return f;
}

inline double max_diff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  }
  return worst;
}

}  // namespace fixtures
