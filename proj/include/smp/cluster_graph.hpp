#pragma once

#include <string>
#include <utility>
#include <vector>

#include "smp/model.hpp"

namespace smp {

struct ClusterEdge {
  int a = 0;
  int b = 0;
  Scope label;
};

/// Vertices and edges labeled with variable sets, plus the cluster each model
/// factor is multiplied into.
class ClusterGraph {
 public:
  int add_vertex(Scope label);
  int add_edge(int a, int b, Scope label);

  std::size_t num_vertices() const noexcept { return labels_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const Scope& label(int v) const { return labels_[static_cast<std::size_t>(v)]; }
  const std::vector<Scope>& labels() const noexcept { return labels_; }
  const ClusterEdge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<ClusterEdge>& edges() const noexcept { return edges_; }
  void set_edge_label(int e, Scope label) { edges_[static_cast<std::size_t>(e)].label = std::move(label); }

  // (neighbor, edge index) pairs ordered by neighbor index.
  std::vector<std::pair<int, int>> neighbors(int v) const;

  // Factor index -> vertex, or empty before assignment.
  const std::vector<int>& factor_vertex() const noexcept { return factor_vertex_; }
  void set_factor_vertex(std::vector<int> assignment) { factor_vertex_ = std::move(assignment); }
  std::vector<int> factors_of(int v) const;

  // No cycles (a forest when the model is disconnected).
  bool is_forest() const;
  std::size_t components() const;
  std::size_t max_cluster_size() const;

 private:
  std::vector<Scope> labels_;
  std::vector<ClusterEdge> edges_;
  std::vector<int> factor_vertex_;
};

enum class EdgeLabels {
  kMinimal,           // labels shrunk to the smallest sets that keep running intersection
  kFullIntersection,  // label = intersection of the endpoint clusters
};

struct JoinGraphParams {
  int i_bound = 6;
  EdgeLabels labels = EdgeLabels::kMinimal;
};

inline constexpr int kDefaultWidthCap = 20;

// Join graph from a schematic mini-bucket pass along the min-fill order: each
// bucket's functions are split first-fit (largest scope first) into
// mini-buckets of at most i_bound variables; one cluster per mini-bucket.
ClusterGraph build_join_graph(const GraphicalModel& model, const JoinGraphParams& params);

// Bucket tree along the min-fill order with subsumed clusters merged away.
ClusterGraph build_junction_tree(const GraphicalModel& model, int width_cap = kDefaultWidthCap);

struct RipViolation {
  VarId var = -1;  // -1 for violations not tied to one variable
  std::string message;
};

// Checks edge labels against their endpoints and that the vertices and edges
// mentioning each variable form a tree.
std::vector<RipViolation> validate_running_intersection(const ClusterGraph& graph);

// Adds the covering condition for each model factor.
std::vector<RipViolation> validate_cluster_graph(const GraphicalModel& model, const ClusterGraph& graph);

// Each factor goes to the smallest covering cluster, ties to the lowest index.
ClusterGraph assign_factors(const GraphicalModel& model, ClusterGraph graph);

// Per variable, keeps it only on a spanning forest of the edges that carry it.
void minimize_edge_labels(ClusterGraph& graph);

std::string dump_cluster_graph(const ClusterGraph& graph);

}  // namespace smp
