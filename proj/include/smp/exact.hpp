#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smp/cluster_graph.hpp"
#include "smp/model.hpp"

namespace smp {

struct ExactResult {
  std::vector<std::vector<double>> marginals;
  // Marginals are undefined (reported uniform) when the model has Z = 0.
  std::vector<bool> flagged;
  double log_z = 0.0;  // -inf when Z = 0
  double z = 0.0;
  int induced_width = 0;
  bool satisfiable() const { return z > 0.0; }
};

// Two-pass message passing on the min-fill junction tree.
ExactResult exact_marginals(const GraphicalModel& model, int width_cap = kDefaultWidthCap);

// Direct enumeration of every assignment.
ExactResult bruteforce_marginals(const GraphicalModel& model, std::uint64_t cap = kDefaultEnumerationCap);

std::string format_exact(const ExactResult& result);

}  // namespace smp
