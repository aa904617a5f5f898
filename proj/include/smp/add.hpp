#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "smp/factor.hpp"
#include "smp/sparse_table.hpp"

namespace smp {

using NodeId = std::uint32_t;

/// Root-to-leaf test order shared by every diagram of a manager.
class VarOrder {
 public:
  VarOrder() = default;
  explicit VarOrder(std::vector<VarId> order);

  const std::vector<VarId>& vars() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_.size(); }
  bool contains(VarId v) const;
  // Position of `v` from the root; throws when absent.
  int level(VarId v) const;

 private:
  std::vector<VarId> order_;
  std::vector<int> level_;
};

enum class AddOp { kProduct, kDivide, kSum };

/// Owns the nodes of reduced, ordered algebraic decision diagrams over
/// multi-valued variables.
///
/// Decision nodes have one child per domain value. Nodes are hash-consed
/// through a unique table, so a function over a given order has exactly one
/// root id: no decision node has all children equal and no two stored nodes
/// are isomorphic. Terminals are merged on exact bit equality of their value.
///
/// Not thread-safe; use one manager per inference run.
class AddManager {
 public:
  // `cards` is indexed by variable id and must cover every variable of `order`.
  AddManager(VarOrder order, std::vector<int> cards);

  AddManager(const AddManager&) = delete;
  AddManager& operator=(const AddManager&) = delete;

  const VarOrder& order() const noexcept { return order_; }
  int cardinality(VarId v) const { return cards_[static_cast<std::size_t>(v)]; }

  NodeId terminal(double value);
  // Returns the unique reduced node testing `var`; collapses to the child
  // when every child is the same.
  NodeId node(VarId var, std::span<const NodeId> children);

  bool is_terminal(NodeId n) const { return nodes_[n].var < 0; }
  double value(NodeId n) const { return nodes_[n].value; }
  VarId var(NodeId n) const { return nodes_[n].var; }
  std::span<const NodeId> children(NodeId n) const;
  // Terminals sit below every variable.
  int level(NodeId n) const;

  NodeId apply(AddOp op, NodeId a, NodeId b);
  NodeId sum_out(NodeId n, VarId v);
  NodeId map_terminals(NodeId n, const std::function<double(NodeId)>& fn);

  // Reachable nodes, parents before children.
  std::vector<NodeId> reachable(NodeId root) const;

  std::size_t stored_nodes() const noexcept { return nodes_.size(); }
  std::size_t memory_bytes() const;

  // Drops the operation caches; node ids stay valid.
  void clear_caches();

 private:
  struct Node {
    VarId var;  // -1 for terminals
    double value;
    std::uint32_t first_child;
  };
  struct NodeKey {
    VarId var;
    std::vector<NodeId> children;
    bool operator==(const NodeKey&) const = default;
  };
  struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const noexcept;
  };

  NodeId apply_rec(AddOp op, NodeId a, NodeId b);
  NodeId sum_out_rec(NodeId n, VarId v, int v_level, NodeId scale);
  NodeId map_rec(NodeId n, const std::function<double(NodeId)>& fn, std::unordered_map<NodeId, NodeId>& memo);

  VarOrder order_;
  std::vector<int> cards_;
  std::vector<Node> nodes_;
  std::vector<NodeId> child_pool_;
  std::unordered_map<std::uint64_t, NodeId> terminals_;
  std::unordered_map<NodeKey, NodeId, NodeKeyHash> unique_;
  std::unordered_map<std::uint64_t, NodeId> apply_cache_[3];
  std::unordered_map<NodeId, NodeId> sum_cache_;
};

/// A diagram handle: root plus the scope it is defined over. Variables of the
/// scope that no path tests are ones the function does not depend on.
struct Add {
  AddManager* manager = nullptr;
  NodeId root = 0;
  Scope scope;

  // Same manager and root (scopes aside).
  bool same_function(const Add& other) const { return manager == other.manager && root == other.root; }
};

Add add_constant(AddManager& mgr, double value, Scope scope = {});
Add add_from_dense(AddManager& mgr, const DenseFactor& f);
// Indicator of a support relation: 1 on its tuples, 0 elsewhere.
Add add_from_support(AddManager& mgr, const SupportRelation& support);
DenseFactor add_to_dense(const Add& d);

double add_evaluate(const Add& d, std::span<const int> full_assignment);

Add add_apply_product(const Add& a, const Add& b);
// 0/0 = 0; x/0 with x > 0 throws DivisionSupportError.
Add add_apply_divide(const Add& a, const Add& b);
Add add_sum_out(const Add& d, const Scope& vars);
double add_total(const Add& d);
Add add_normalize(const Add& d);

// Number of complete assignments of `scope` reaching each reachable terminal.
std::map<NodeId, std::uint64_t> leaf_model_counts(const Add& d, const Scope& scope);
std::uint64_t leaf_model_count(const Add& d, NodeId terminal, const Scope& scope);

// Replaces each nonzero terminal of `structure` by the mean of `phi` over the
// assignments reaching it. Terminals equal to zero stay zero.
Add add_lossy_project(const Add& phi, const Add& structure);
Add add_lossy_project(const DenseFactor& phi, const Add& structure);

Add add_quantize(const Add& d, double epsilon);

// Distinct terminal values reachable from the root.
std::vector<double> add_terminal_values(const Add& d);
std::size_t add_node_count(const Add& d);

// Structural check of the ordered/reduced invariants; empty when they hold.
std::vector<std::string> add_check_reduced(const Add& d);

// Graphviz text; for debugging only.
std::string add_to_dot(const Add& d);

}  // namespace smp
