#include "smp/cluster_graph.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "smp/errors.hpp"
#include "smp/ordering.hpp"

namespace smp {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string scope_text(const Scope& s) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
  return out.str();
}

struct BucketFunction {
  Scope scope;
  int from_cluster = -1;  // sending cluster for messages
};

// Shared mini-bucket schematic; `limit` of INT_MAX yields the bucket tree.
ClusterGraph schematic_elimination(const GraphicalModel& model, const std::vector<VarId>& order, int limit) {
  const std::size_t n = model.num_variables();
  std::vector<int> pos(n);
  for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  auto first_eliminated = [&](const Scope& s) {
    return *std::min_element(s.begin(), s.end(), [&](VarId a, VarId b) {
      return pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)];
    });
  };

  std::vector<std::vector<BucketFunction>> buckets(n);
  std::vector<bool> mentioned(n, false);
  for (const auto& f : model.factors()) {
    if (f.scope().empty()) continue;
    for (VarId v : f.scope()) mentioned[static_cast<std::size_t>(v)] = true;
    buckets[static_cast<std::size_t>(first_eliminated(f.scope()))].push_back({f.scope(), -1});
  }

  ClusterGraph graph;
  for (VarId v : order) {
    auto fns = std::move(buckets[static_cast<std::size_t>(v)]);
    if (fns.empty()) {
      if (!mentioned[static_cast<std::size_t>(v)]) graph.add_vertex({v});
      continue;
    }
    std::stable_sort(fns.begin(), fns.end(),
                     [](const BucketFunction& a, const BucketFunction& b) { return a.scope.size() > b.scope.size(); });
    std::vector<std::pair<Scope, std::vector<BucketFunction>>> minis;
    for (auto& fn : fns) {
      bool placed = false;
      for (auto& [label, members] : minis) {
        Scope merged = scope_union(label, fn.scope);
        if (merged.size() <= static_cast<std::size_t>(limit)) {
          label = std::move(merged);
          members.push_back(std::move(fn));
          placed = true;
          break;
        }
      }
      if (!placed) {
        Scope label = fn.scope;
        minis.emplace_back(std::move(label), std::vector<BucketFunction>{std::move(fn)});
      }
    }
    std::vector<int> ids;
    for (auto& [label, members] : minis) {
      int id = graph.add_vertex(label);
      ids.push_back(id);
      for (const auto& fn : members) {
        if (fn.from_cluster >= 0) graph.add_edge(fn.from_cluster, id, fn.scope);
      }
      Scope message = scope_difference(label, {v});
      if (!message.empty()) {
        buckets[static_cast<std::size_t>(first_eliminated(message))].push_back({std::move(message), id});
      }
    }
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) graph.add_edge(ids[i], ids[i + 1], {v});
  }
  return graph;
}

}  // namespace

int ClusterGraph::add_vertex(Scope label) {
  labels_.push_back(std::move(label));
  return static_cast<int>(labels_.size() - 1);
}

int ClusterGraph::add_edge(int a, int b, Scope label) {
  if (a == b) throw ConstructionError("self-loop on cluster " + std::to_string(a));
  edges_.push_back({a, b, std::move(label)});
  return static_cast<int>(edges_.size() - 1);
}

std::vector<std::pair<int, int>> ClusterGraph::neighbors(int v) const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].a == v) out.emplace_back(edges_[e].b, static_cast<int>(e));
    if (edges_[e].b == v) out.emplace_back(edges_[e].a, static_cast<int>(e));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ClusterGraph::factors_of(int v) const {
  std::vector<int> out;
  for (std::size_t f = 0; f < factor_vertex_.size(); ++f) {
    if (factor_vertex_[f] == v) out.push_back(static_cast<int>(f));
  }
  return out;
}

bool ClusterGraph::is_forest() const {
  DisjointSets ds(labels_.size());
  for (const auto& e : edges_) {
    if (!ds.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) return false;
  }
  return true;
}

std::size_t ClusterGraph::components() const {
  DisjointSets ds(labels_.size());
  std::size_t count = labels_.size();
  for (const auto& e : edges_) {
    if (ds.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) --count;
  }
  return count;
}

std::size_t ClusterGraph::max_cluster_size() const {
  std::size_t m = 0;
  for (const auto& l : labels_) m = std::max(m, l.size());
  return m;
}

ClusterGraph build_join_graph(const GraphicalModel& model, const JoinGraphParams& params) {
  if (params.i_bound < 1) throw ConstructionError("i-bound must be at least 1");
  if (model.max_arity() > static_cast<std::size_t>(params.i_bound)) {
    throw ConstructionError("i-bound " + std::to_string(params.i_bound) + " is below the largest factor arity " +
                            std::to_string(model.max_arity()));
  }
  ClusterGraph graph = schematic_elimination(model, min_fill_order(model).order, params.i_bound);
  if (params.labels == EdgeLabels::kFullIntersection) {
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
      const auto& edge = graph.edge(static_cast<int>(e));
      graph.set_edge_label(static_cast<int>(e), scope_intersection(graph.label(edge.a), graph.label(edge.b)));
    }
  } else {
    minimize_edge_labels(graph);
  }
  return assign_factors(model, std::move(graph));
}

ClusterGraph build_junction_tree(const GraphicalModel& model, int width_cap) {
  EliminationOrder eo = min_fill_order(model);
  if (eo.induced_width > width_cap) {
    throw CapError("induced width " + std::to_string(eo.induced_width) + " exceeds cap " + std::to_string(width_cap));
  }
  ClusterGraph bucket_tree = schematic_elimination(model, eo.order, INT_MAX);

  // Contract every cluster whose label is contained in a neighbor's.
  const std::size_t n = bucket_tree.num_vertices();
  std::vector<std::set<int>> adj(n);
  for (const auto& e : bucket_tree.edges()) {
    adj[static_cast<std::size_t>(e.a)].insert(e.b);
    adj[static_cast<std::size_t>(e.b)].insert(e.a);
  }
  std::vector<bool> alive(n, true);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t c = 0; c < n; ++c) {
      if (!alive[c]) continue;
      for (int d : adj[c]) {
        if (!scope_includes(bucket_tree.label(d), bucket_tree.label(static_cast<int>(c)))) continue;
        for (int other : adj[c]) {
          if (other == d) continue;
          adj[static_cast<std::size_t>(other)].erase(static_cast<int>(c));
          adj[static_cast<std::size_t>(other)].insert(d);
          adj[static_cast<std::size_t>(d)].insert(other);
        }
        adj[static_cast<std::size_t>(d)].erase(static_cast<int>(c));
        adj[c].clear();
        alive[c] = false;
        changed = true;
        break;
      }
    }
  }
  ClusterGraph tree;
  std::vector<int> remap(n, -1);
  for (std::size_t c = 0; c < n; ++c) {
    if (alive[c]) remap[c] = tree.add_vertex(bucket_tree.label(static_cast<int>(c)));
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (!alive[c]) continue;
    for (int d : adj[c]) {
      if (static_cast<std::size_t>(d) < c) continue;
      tree.add_edge(remap[c], remap[static_cast<std::size_t>(d)],
                    scope_intersection(bucket_tree.label(static_cast<int>(c)), bucket_tree.label(d)));
    }
  }
  return assign_factors(model, std::move(tree));
}

std::vector<RipViolation> validate_running_intersection(const ClusterGraph& graph) {
  std::vector<RipViolation> out;
  std::set<VarId> vars;
  for (const auto& l : graph.labels()) vars.insert(l.begin(), l.end());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    if (edge.a < 0 || edge.b < 0 || static_cast<std::size_t>(std::max(edge.a, edge.b)) >= graph.num_vertices()) {
      out.push_back({-1, "edge " + std::to_string(e) + " has an endpoint out of range"});
      continue;
    }
    if (!scope_includes(graph.label(edge.a), edge.label) || !scope_includes(graph.label(edge.b), edge.label)) {
      out.push_back({-1, "edge " + std::to_string(e) + " label is not contained in both endpoint clusters"});
    }
    vars.insert(edge.label.begin(), edge.label.end());
  }
  for (VarId x : vars) {
    std::vector<std::size_t> verts;
    for (std::size_t v = 0; v < graph.num_vertices(); ++v) {
      if (std::binary_search(graph.label(static_cast<int>(v)).begin(), graph.label(static_cast<int>(v)).end(), x)) {
        verts.push_back(v);
      }
    }
    DisjointSets ds(graph.num_vertices());
    std::size_t pieces = verts.size();
    bool cyclic = false;
    for (const auto& edge : graph.edges()) {
      if (!std::binary_search(edge.label.begin(), edge.label.end(), x)) continue;
      if (ds.unite(static_cast<std::size_t>(edge.a), static_cast<std::size_t>(edge.b))) {
        --pieces;
      } else {
        cyclic = true;
      }
    }
    if (pieces > 1) {
      out.push_back({x, "clusters mentioning variable " + std::to_string(x) + " are not connected"});
    }
    if (cyclic) out.push_back({x, "edges mentioning variable " + std::to_string(x) + " form a cycle"});
  }
  return out;
}

std::vector<RipViolation> validate_cluster_graph(const GraphicalModel& model, const ClusterGraph& graph) {
  auto out = validate_running_intersection(graph);
  const auto& fv = graph.factor_vertex();
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    const Scope& s = model.factor(f).scope();
    bool covered = std::any_of(graph.labels().begin(), graph.labels().end(),
                               [&](const Scope& l) { return scope_includes(l, s); });
    if (!covered) out.push_back({-1, "factor " + std::to_string(f) + " is not covered by any cluster"});
    if (f < fv.size() && fv[f] >= 0 && !scope_includes(graph.label(fv[f]), s)) {
      out.push_back({-1, "factor " + std::to_string(f) + " is assigned to a cluster that does not cover it"});
    }
  }
  return out;
}

ClusterGraph assign_factors(const GraphicalModel& model, ClusterGraph graph) {
  if (graph.num_vertices() == 0) throw ConstructionError("cluster graph has no vertices");
  std::vector<int> assignment(model.num_factors(), -1);
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    const Scope& s = model.factor(f).scope();
    int best = -1;
    for (std::size_t v = 0; v < graph.num_vertices(); ++v) {
      const Scope& l = graph.label(static_cast<int>(v));
      if (!scope_includes(l, s)) continue;
      if (best < 0 || l.size() < graph.label(best).size()) best = static_cast<int>(v);
    }
    if (best < 0) throw ConstructionError("no cluster covers factor " + std::to_string(f));
    assignment[f] = best;
  }
  graph.set_factor_vertex(std::move(assignment));
  return graph;
}

void minimize_edge_labels(ClusterGraph& graph) {
  std::map<VarId, DisjointSets> forests;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    Scope kept;
    for (VarId x : edge.label) {
      auto it = forests.try_emplace(x, graph.num_vertices()).first;
      if (it->second.unite(static_cast<std::size_t>(edge.a), static_cast<std::size_t>(edge.b))) kept.push_back(x);
    }
    graph.set_edge_label(static_cast<int>(e), std::move(kept));
  }
}

std::string dump_cluster_graph(const ClusterGraph& graph) {
  std::ostringstream out;
  out << "clusters " << graph.num_vertices() << '\n';
  for (std::size_t v = 0; v < graph.num_vertices(); ++v) {
    out << "cluster " << v << " : " << scope_text(graph.label(static_cast<int>(v))) << '\n';
  }
  out << "edges " << graph.num_edges() << '\n';
  for (const auto& e : graph.edges()) out << "edge " << e.a << ' ' << e.b << " : " << scope_text(e.label) << '\n';
  out << "factors " << graph.factor_vertex().size() << '\n';
  for (std::size_t f = 0; f < graph.factor_vertex().size(); ++f) {
    out << "factor " << f << " -> " << graph.factor_vertex()[f] << '\n';
  }
  return out.str();
}

}  // namespace smp
