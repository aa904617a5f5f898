#include "smp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smp/engine.hpp"
#include "smp/errors.hpp"
#include "smp/ordering.hpp"

namespace smp {

namespace {

void fill_unsatisfiable(const GraphicalModel& model, ExactResult& r) {
  r.z = 0.0;
  r.log_z = -std::numeric_limits<double>::infinity();
  r.marginals.clear();
  r.flagged.assign(model.num_variables(), true);
  for (std::size_t v = 0; v < model.num_variables(); ++v) {
    const int c = model.cardinality(static_cast<VarId>(v));
    r.marginals.emplace_back(static_cast<std::size_t>(c), 1.0 / c);
  }
}

// Scales `f` to sum 1 and returns the log of the removed mass.
double rescale(DenseFactor& f) {
  const double s = f.sum();
  if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
  for (double& v : f.mutable_values()) v /= s;
  return std::log(s);
}

}  // namespace

ExactResult exact_marginals(const GraphicalModel& model, int width_cap) {
  ClusterGraph tree = build_junction_tree(model, width_cap);
  ExactResult r;
  r.induced_width = min_fill_order(model).induced_width;
  const std::size_t n = tree.num_vertices();

  std::vector<DenseFactor> pot(n);
  for (std::size_t v = 0; v < n; ++v) {
    const Scope& l = tree.label(static_cast<int>(v));
    pot[v] = DenseFactor::constant(l, model.cards_of(l), 1.0);
    for (int f : tree.factors_of(static_cast<int>(v))) pot[v] = factor_product(pot[v], model.factor(static_cast<std::size_t>(f)));
  }

  // Root each tree at its lowest vertex; BFS gives parents before children.
  std::vector<int> parent(n, -1), order;
  std::vector<bool> seen(n, false);
  std::vector<int> roots;
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    roots.push_back(static_cast<int>(root));
    seen[root] = true;
    std::size_t head = order.size();
    order.push_back(static_cast<int>(root));
    while (head < order.size()) {
      int v = order[head++];
      for (auto [nb, e] : tree.neighbors(v)) {
        if (seen[static_cast<std::size_t>(nb)]) continue;
        seen[static_cast<std::size_t>(nb)] = true;
        parent[static_cast<std::size_t>(nb)] = v;
        order.push_back(nb);
      }
    }
  }

  // Upward pass: up[v] is v's message to its parent, each rescaled to sum 1.
  std::vector<DenseFactor> up(n);
  std::vector<DenseFactor> collected = pot;
  double log_z = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    if (parent[v] < 0) continue;
    const Scope sep = scope_intersection(tree.label(static_cast<int>(v)), tree.label(parent[v]));
    up[v] = factor_marginal(collected[v], sep);
    log_z += rescale(up[v]);
    auto& target = collected[static_cast<std::size_t>(parent[v])];
    target = factor_product(target, up[v]);
  }
  for (int root : roots) log_z += std::log(collected[static_cast<std::size_t>(root)].sum());
  if (!std::isfinite(log_z)) {
    fill_unsatisfiable(model, r);
    return r;
  }
  r.log_z = log_z;
  r.z = std::exp(log_z);

  // Downward pass: belief(child) = collected(child) * (belief(parent) / up(child)) on the separator.
  std::vector<DenseFactor> belief(n);
  for (int v : order) {
    const auto vi = static_cast<std::size_t>(v);
    if (parent[vi] < 0) {
      belief[vi] = collected[vi];
    } else {
      const auto p = static_cast<std::size_t>(parent[vi]);
      DenseFactor down = factor_divide(factor_marginal(belief[p], up[vi].scope()), up[vi]);
      belief[vi] = factor_product(collected[vi], down);
    }
    rescale(belief[vi]);
  }

  r.flagged.assign(model.num_variables(), false);
  for (std::size_t x = 0; x < model.num_variables(); ++x) {
    const VarId var = static_cast<VarId>(x);
    int best = -1;
    for (std::size_t v = 0; v < n; ++v) {
      const Scope& l = tree.label(static_cast<int>(v));
      if (!std::binary_search(l.begin(), l.end(), var)) continue;
      if (best < 0 || l.size() < tree.label(best).size()) best = static_cast<int>(v);
    }
    DenseFactor m = normalize(factor_marginal(belief[static_cast<std::size_t>(best)], {var}));
    r.marginals.push_back(m.values());
  }
  return r;
}

ExactResult bruteforce_marginals(const GraphicalModel& model, std::uint64_t cap) {
  if (model.configuration_count() > cap) throw CapError("model has more assignments than the enumeration cap");
  ExactResult r;
  r.induced_width = min_fill_order(model).induced_width;
  std::vector<std::vector<double>> acc;
  for (std::size_t v = 0; v < model.num_variables(); ++v) {
    acc.emplace_back(static_cast<std::size_t>(model.cardinality(static_cast<VarId>(v))), 0.0);
  }
  double z = 0.0;
  for_each_assignment(model.cardinalities(), [&](const Assignment& x) {
    const double w = evaluate_unnormalized(model, x);
    if (w == 0.0) return;
    z += w;
    for (std::size_t v = 0; v < x.size(); ++v) acc[v][static_cast<std::size_t>(x[v])] += w;
  });
  if (!(z > 0.0)) {
    fill_unsatisfiable(model, r);
    return r;
  }
  r.z = z;
  r.log_z = std::log(z);
  for (auto& m : acc) {
    for (double& p : m) p /= z;
  }
  r.marginals = std::move(acc);
  r.flagged.assign(model.num_variables(), false);
  return r;
}

std::string format_exact(const ExactResult& result) {
  Marginals m{result.marginals, result.flagged};
  return format_marginals(m, MarginalsHeader{std::nullopt, 1, true});
}

}  // namespace smp
