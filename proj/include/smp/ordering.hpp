#pragma once

#include <vector>

#include "smp/model.hpp"

namespace smp {

struct EliminationOrder {
  std::vector<VarId> order;
  // Largest (clique size - 1) met while eliminating in this order.
  int induced_width = 0;
};

// Greedy min-fill on the primal graph; ties go to the lowest variable index.
EliminationOrder min_fill_order(const GraphicalModel& model);

// Induced width of a given order.
int induced_width(const GraphicalModel& model, const std::vector<VarId>& order);

}  // namespace smp
