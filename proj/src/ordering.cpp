#include "smp/ordering.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace smp {

namespace {

std::vector<std::set<VarId>> primal_graph(const GraphicalModel& model) {
  std::vector<std::set<VarId>> adj(model.num_variables());
  for (const auto& f : model.factors()) {
    for (VarId a : f.scope()) {
      for (VarId b : f.scope()) {
        if (a != b) adj[static_cast<std::size_t>(a)].insert(b);
      }
    }
  }
  return adj;
}

std::size_t fill_in(const std::vector<std::set<VarId>>& adj, VarId v) {
  const auto& nb = adj[static_cast<std::size_t>(v)];
  std::size_t fill = 0;
  for (auto i = nb.begin(); i != nb.end(); ++i) {
    for (auto j = std::next(i); j != nb.end(); ++j) {
      if (!adj[static_cast<std::size_t>(*i)].contains(*j)) ++fill;
    }
  }
  return fill;
}

void eliminate(std::vector<std::set<VarId>>& adj, VarId v) {
  auto nb = adj[static_cast<std::size_t>(v)];
  for (VarId a : nb) {
    adj[static_cast<std::size_t>(a)].erase(v);
    for (VarId b : nb) {
      if (a != b) adj[static_cast<std::size_t>(a)].insert(b);
    }
  }
  adj[static_cast<std::size_t>(v)].clear();
}

}  // namespace

EliminationOrder min_fill_order(const GraphicalModel& model) {
  auto adj = primal_graph(model);
  const std::size_t n = model.num_variables();
  std::vector<bool> done(n, false);
  EliminationOrder result;
  result.order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    VarId best = -1;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      std::size_t f = fill_in(adj, static_cast<VarId>(v));
      if (f < best_fill) {
        best_fill = f;
        best = static_cast<VarId>(v);
      }
    }
    result.induced_width = std::max(result.induced_width, static_cast<int>(adj[static_cast<std::size_t>(best)].size()));
    eliminate(adj, best);
    done[static_cast<std::size_t>(best)] = true;
    result.order.push_back(best);
  }
  return result;
}

int induced_width(const GraphicalModel& model, const std::vector<VarId>& order) {
  auto adj = primal_graph(model);
  int width = 0;
  for (VarId v : order) {
    width = std::max(width, static_cast<int>(adj[static_cast<std::size_t>(v)].size()));
    eliminate(adj, v);
  }
  return width;
}

}  // namespace smp
