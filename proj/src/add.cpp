#include "smp/add.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "smp/errors.hpp"
#include "smp/quantize.hpp"

namespace smp {

VarOrder::VarOrder(std::vector<VarId> order) : order_(std::move(order)) {
  VarId max_var = -1;
  for (VarId v : order_) {
    if (v < 0) throw ContractError("negative variable id in order");
    max_var = std::max(max_var, v);
  }
  level_.assign(static_cast<std::size_t>(max_var + 1), -1);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    auto& slot = level_[static_cast<std::size_t>(order_[i])];
    if (slot >= 0) throw ContractError("variable repeated in order");
    slot = static_cast<int>(i);
  }
}

bool VarOrder::contains(VarId v) const {
  return v >= 0 && static_cast<std::size_t>(v) < level_.size() && level_[static_cast<std::size_t>(v)] >= 0;
}

int VarOrder::level(VarId v) const {
  if (!contains(v)) throw ContractError("variable " + std::to_string(v) + " is not in the diagram order");
  return level_[static_cast<std::size_t>(v)];
}

std::size_t AddManager::NodeKeyHash::operator()(const NodeKey& k) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(k.var);
  for (NodeId c : k.children) {
    h ^= c + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

AddManager::AddManager(VarOrder order, std::vector<int> cards) : order_(std::move(order)), cards_(std::move(cards)) {
  for (VarId v : order_.vars()) {
    if (static_cast<std::size_t>(v) >= cards_.size() || cards_[static_cast<std::size_t>(v)] < 1) {
      throw ContractError("missing cardinality for variable " + std::to_string(v));
    }
  }
}

NodeId AddManager::terminal(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ContractError("terminal values must be finite and nonnegative");
  if (value == 0.0) value = 0.0;  // folds -0.0
  auto bits = std::bit_cast<std::uint64_t>(value);
  auto it = terminals_.find(bits);
  if (it != terminals_.end()) return it->second;
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({-1, value, 0});
  terminals_.emplace(bits, id);
  return id;
}

NodeId AddManager::node(VarId var, std::span<const NodeId> children) {
  if (children.size() != static_cast<std::size_t>(cardinality(var))) {
    throw ContractError("decision node needs one child per domain value");
  }
  int lvl = order_.level(var);
  for (NodeId c : children) {
    if (level(c) <= lvl) throw ContractError("child violates the variable order");
  }
  if (std::all_of(children.begin(), children.end(), [&](NodeId c) { return c == children[0]; })) {
    return children[0];
  }
  NodeKey key{var, std::vector<NodeId>(children.begin(), children.end())};
  auto it = unique_.find(key);
  if (it != unique_.end()) return it->second;
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({var, 0.0, static_cast<std::uint32_t>(child_pool_.size())});
  child_pool_.insert(child_pool_.end(), children.begin(), children.end());
  unique_.emplace(std::move(key), id);
  return id;
}

std::span<const NodeId> AddManager::children(NodeId n) const {
  const Node& node = nodes_[n];
  if (node.var < 0) return {};
  return {child_pool_.data() + node.first_child, static_cast<std::size_t>(cardinality(node.var))};
}

int AddManager::level(NodeId n) const {
  const Node& node = nodes_[n];
  return node.var < 0 ? INT_MAX : order_.level(node.var);
}

void AddManager::clear_caches() {
  for (auto& c : apply_cache_) c.clear();
  sum_cache_.clear();
}

std::size_t AddManager::memory_bytes() const {
  // rough: node record, child slots and one unique-table entry per node
  return nodes_.size() * (sizeof(Node) + 64) + child_pool_.size() * (sizeof(NodeId) * 2);
}

NodeId AddManager::apply(AddOp op, NodeId a, NodeId b) { return apply_rec(op, a, b); }

NodeId AddManager::apply_rec(AddOp op, NodeId a, NodeId b) {
  const bool ta = is_terminal(a), tb = is_terminal(b);
  switch (op) {
    case AddOp::kProduct:
      if ((ta && value(a) == 0.0) || (tb && value(b) == 1.0)) return a;
      if ((tb && value(b) == 0.0) || (ta && value(a) == 1.0)) return b;
      if (ta && tb) return terminal(value(a) * value(b));
      if (a > b) std::swap(a, b);
      break;
    case AddOp::kDivide:
      if (ta && value(a) == 0.0) return a;
      if (tb && value(b) == 1.0) return a;
      if (ta && tb) {
        if (value(b) == 0.0) throw DivisionSupportError("diagram division by zero");
        return terminal(value(a) / value(b));
      }
      break;
    case AddOp::kSum:
      if (ta && value(a) == 0.0) return b;
      if (tb && value(b) == 0.0) return a;
      if (ta && tb) return terminal(value(a) + value(b));
      if (a > b) std::swap(a, b);
      break;
  }
  auto& cache = apply_cache_[static_cast<int>(op)];
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int la = level(a), lb = level(b);
  const int top = std::min(la, lb);
  const VarId v = order_.vars()[static_cast<std::size_t>(top)];
  const auto card = static_cast<std::size_t>(cardinality(v));
  std::vector<NodeId> ca(card, a), cb(card, b);
  if (la == top) std::copy_n(children(a).begin(), card, ca.begin());
  if (lb == top) std::copy_n(children(b).begin(), card, cb.begin());
  std::vector<NodeId> out(card);
  for (std::size_t i = 0; i < card; ++i) out[i] = apply_rec(op, ca[i], cb[i]);
  NodeId r = node(v, out);
  cache.emplace(key, r);
  return r;
}

NodeId AddManager::sum_out(NodeId n, VarId v) {
  sum_cache_.clear();
  NodeId scale = terminal(static_cast<double>(cardinality(v)));
  return sum_out_rec(n, v, order_.level(v), scale);
}

NodeId AddManager::sum_out_rec(NodeId n, VarId v, int v_level, NodeId scale) {
  const int l = level(n);
  // the path skips v: the sub-function is constant in v
  if (l > v_level) return apply_rec(AddOp::kProduct, n, scale);
  if (auto it = sum_cache_.find(n); it != sum_cache_.end()) return it->second;
  std::vector<NodeId> kids(children(n).begin(), children(n).end());
  NodeId r;
  if (l == v_level) {
    r = kids[0];
    for (std::size_t i = 1; i < kids.size(); ++i) r = apply_rec(AddOp::kSum, r, kids[i]);
  } else {
    for (auto& k : kids) k = sum_out_rec(k, v, v_level, scale);
    r = node(var(n), kids);
  }
  sum_cache_.emplace(n, r);
  return r;
}

NodeId AddManager::map_terminals(NodeId n, const std::function<double(NodeId)>& fn) {
  std::unordered_map<NodeId, NodeId> memo;
  return map_rec(n, fn, memo);
}

NodeId AddManager::map_rec(NodeId n, const std::function<double(NodeId)>& fn,
                           std::unordered_map<NodeId, NodeId>& memo) {
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  NodeId r;
  if (is_terminal(n)) {
    r = terminal(fn(n));
  } else {
    std::vector<NodeId> kids(children(n).begin(), children(n).end());
    for (auto& k : kids) k = map_rec(k, fn, memo);
    r = node(var(n), kids);
  }
  memo.emplace(n, r);
  return r;
}

std::vector<NodeId> AddManager::reachable(NodeId root) const {
  std::vector<NodeId> out;
  std::set<NodeId> seen{root};
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (NodeId c : children(n)) {
      if (seen.insert(c).second) stack.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(), [&](NodeId x, NodeId y) {
    if (level(x) != level(y)) return level(x) < level(y);
    return x < y;
  });
  return out;
}

namespace {

void require_same_manager(const Add& a, const Add& b) {
  if (a.manager == nullptr || a.manager != b.manager) throw ContractError("diagrams belong to different managers");
}

// Scope variables sorted root-to-leaf, and prefix products of their
// cardinalities: prefix[i] = product of the first i cardinalities.
struct LevelIndex {
  std::vector<VarId> vars;
  std::vector<int> levels;
  std::vector<std::uint64_t> prefix;

  LevelIndex(const AddManager& mgr, const Scope& scope) {
    vars = scope;
    std::sort(vars.begin(), vars.end(),
              [&](VarId x, VarId y) { return mgr.order().level(x) < mgr.order().level(y); });
    prefix.push_back(1);
    for (VarId v : vars) {
      levels.push_back(mgr.order().level(v));
      auto c = static_cast<std::uint64_t>(mgr.cardinality(v));
      if (prefix.back() > std::numeric_limits<std::uint64_t>::max() / c) {
        throw ContractError("assignment space overflows 64 bits");
      }
      prefix.push_back(prefix.back() * c);
    }
  }

  // Index of the node's variable within the scope; terminals map past the end.
  std::size_t index_of(const AddManager& mgr, NodeId n) const {
    if (mgr.is_terminal(n)) return vars.size();
    int l = mgr.level(n);
    auto it = std::lower_bound(levels.begin(), levels.end(), l);
    if (it == levels.end() || *it != l) throw ContractError("diagram tests a variable outside the given scope");
    return static_cast<std::size_t>(it - levels.begin());
  }

  // Number of assignments to scope variables strictly between two indices.
  std::uint64_t between(std::size_t from, std::size_t to) const { return prefix[to] / prefix[from + 1]; }
};

}  // namespace

Add add_constant(AddManager& mgr, double value, Scope scope) {
  return Add{&mgr, mgr.terminal(value), std::move(scope)};
}

Add add_from_dense(AddManager& mgr, const DenseFactor& f) {
  const Scope& scope = f.scope();
  std::vector<std::size_t> pos(scope.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  std::sort(pos.begin(), pos.end(),
            [&](std::size_t x, std::size_t y) { return mgr.order().level(scope[x]) < mgr.order().level(scope[y]); });
  std::vector<std::size_t> strides(scope.size());
  std::size_t s = 1;
  for (std::size_t i = scope.size(); i-- > 0;) {
    strides[i] = s;
    s *= static_cast<std::size_t>(f.cards()[i]);
  }
  // depth-first over the diagram order; offset is the canonical table index
  std::function<NodeId(std::size_t, std::size_t)> build = [&](std::size_t depth, std::size_t offset) -> NodeId {
    if (depth == pos.size()) return mgr.terminal(f[offset]);
    std::size_t p = pos[depth];
    std::vector<NodeId> kids(static_cast<std::size_t>(f.cards()[p]));
    for (std::size_t i = 0; i < kids.size(); ++i) kids[i] = build(depth + 1, offset + i * strides[p]);
    return mgr.node(scope[p], kids);
  };
  return Add{&mgr, build(0, 0), scope};
}

Add add_from_support(AddManager& mgr, const SupportRelation& support) {
  return add_from_dense(mgr, support.indicator());
}

double add_evaluate(const Add& d, std::span<const int> full_assignment) {
  const AddManager& mgr = *d.manager;
  NodeId n = d.root;
  while (!mgr.is_terminal(n)) {
    n = mgr.children(n)[static_cast<std::size_t>(full_assignment[static_cast<std::size_t>(mgr.var(n))])];
  }
  return mgr.value(n);
}

DenseFactor add_to_dense(const Add& d) {
  std::vector<int> cards;
  for (VarId v : d.scope) cards.push_back(d.manager->cardinality(v));
  DenseFactor out = DenseFactor::constant(d.scope, cards, 0.0);
  VarId max_var = d.scope.empty() ? 0 : d.scope.back();
  std::vector<int> full(static_cast<std::size_t>(max_var + 1), 0);
  std::vector<int> local(d.scope.size());
  auto& values = out.mutable_values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.decode(i, local);
    for (std::size_t j = 0; j < local.size(); ++j) full[static_cast<std::size_t>(d.scope[j])] = local[j];
    values[i] = add_evaluate(d, full);
  }
  return out;
}

Add add_apply_product(const Add& a, const Add& b) {
  require_same_manager(a, b);
  a.manager->clear_caches();
  return Add{a.manager, a.manager->apply(AddOp::kProduct, a.root, b.root), scope_union(a.scope, b.scope)};
}

Add add_apply_divide(const Add& a, const Add& b) {
  require_same_manager(a, b);
  if (!scope_includes(a.scope, b.scope)) throw ContractError("divide: divisor scope not contained in dividend");
  a.manager->clear_caches();
  return Add{a.manager, a.manager->apply(AddOp::kDivide, a.root, b.root), a.scope};
}

Add add_sum_out(const Add& d, const Scope& vars) {
  if (!scope_includes(d.scope, vars)) throw ContractError("sum_out: variables not in diagram scope");
  AddManager& mgr = *d.manager;
  mgr.clear_caches();
  NodeId r = d.root;
  // deepest first keeps intermediate diagrams small
  Scope ordered = vars;
  std::sort(ordered.begin(), ordered.end(),
            [&](VarId x, VarId y) { return mgr.order().level(x) > mgr.order().level(y); });
  for (VarId v : ordered) r = mgr.sum_out(r, v);
  return Add{&mgr, r, scope_difference(d.scope, vars)};
}

std::map<NodeId, std::uint64_t> leaf_model_counts(const Add& d, const Scope& scope) {
  const AddManager& mgr = *d.manager;
  LevelIndex idx(mgr, scope);
  std::map<NodeId, std::uint64_t> weight;
  auto nodes = mgr.reachable(d.root);
  weight[d.root] = idx.prefix[idx.index_of(mgr, d.root)];
  std::map<NodeId, std::uint64_t> counts;
  for (NodeId n : nodes) {
    std::uint64_t w = weight[n];
    if (mgr.is_terminal(n)) {
      counts[n] += w;
      continue;
    }
    std::size_t from = idx.index_of(mgr, n);
    for (NodeId c : mgr.children(n)) weight[c] += w * idx.between(from, idx.index_of(mgr, c));
  }
  return counts;
}

std::uint64_t leaf_model_count(const Add& d, NodeId terminal, const Scope& scope) {
  auto counts = leaf_model_counts(d, scope);
  auto it = counts.find(terminal);
  return it == counts.end() ? 0 : it->second;
}

double add_total(const Add& d) {
  double total = 0.0;
  for (auto [t, count] : leaf_model_counts(d, d.scope)) total += d.manager->value(t) * static_cast<double>(count);
  return total;
}

Add add_normalize(const Add& d) {
  double z = add_total(d);
  if (!(z > 0.0)) throw NormalizationError("cannot normalize an all-zero diagram");
  AddManager& mgr = *d.manager;
  mgr.clear_caches();
  return Add{&mgr, mgr.map_terminals(d.root, [&](NodeId t) { return mgr.value(t) / z; }), d.scope};
}

Add add_lossy_project(const Add& phi, const Add& structure) {
  require_same_manager(phi, structure);
  if (phi.scope != structure.scope) throw ContractError("lossy projection needs a structure over the same scope");
  AddManager& mgr = *phi.manager;
  LevelIndex idx(mgr, structure.scope);
  const std::size_t depth = idx.vars.size();

  // Joint top-down walk over (structure node, phi node) pairs, bucketed by the
  // scope index of the shallower node. Weights count partial assignments.
  auto pack = [](NodeId s, NodeId p) { return (static_cast<std::uint64_t>(s) << 32) | p; };
  std::vector<std::map<std::uint64_t, std::uint64_t>> buckets(depth + 1);
  auto pair_index = [&](NodeId s, NodeId p) { return std::min(idx.index_of(mgr, s), idx.index_of(mgr, p)); };
  std::size_t start = pair_index(structure.root, phi.root);
  buckets[start][pack(structure.root, phi.root)] = idx.prefix[start];

  for (std::size_t level = 0; level < depth; ++level) {
    for (auto [key, w] : buckets[level]) {
      auto s = static_cast<NodeId>(key >> 32);
      auto p = static_cast<NodeId>(key & 0xffffffffu);
      const auto card = static_cast<std::size_t>(mgr.cardinality(idx.vars[level]));
      const bool split_s = idx.index_of(mgr, s) == level;
      const bool split_p = idx.index_of(mgr, p) == level;
      for (std::size_t i = 0; i < card; ++i) {
        NodeId cs = split_s ? mgr.children(s)[i] : s;
        NodeId cp = split_p ? mgr.children(p)[i] : p;
        std::size_t next = pair_index(cs, cp);
        buckets[next][pack(cs, cp)] += w * idx.between(level, next);
      }
    }
  }
  std::map<NodeId, std::pair<double, std::uint64_t>> acc;  // structure terminal -> (mass, count)
  for (auto [key, w] : buckets[depth]) {
    auto s = static_cast<NodeId>(key >> 32);
    auto p = static_cast<NodeId>(key & 0xffffffffu);
    auto& [mass, count] = acc[s];
    mass += mgr.value(p) * static_cast<double>(w);
    count += w;
  }
  mgr.clear_caches();
  NodeId root = mgr.map_terminals(structure.root, [&](NodeId t) {
    if (mgr.value(t) == 0.0) return 0.0;
    const auto& [mass, count] = acc.at(t);
    return mass / static_cast<double>(count);
  });
  return Add{&mgr, root, structure.scope};
}

Add add_lossy_project(const DenseFactor& phi, const Add& structure) {
  return add_lossy_project(add_from_dense(*structure.manager, phi), structure);
}

std::vector<double> add_terminal_values(const Add& d) {
  std::vector<double> out;
  for (NodeId n : d.manager->reachable(d.root)) {
    if (d.manager->is_terminal(n)) out.push_back(d.manager->value(n));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Add add_quantize(const Add& d, double epsilon) {
  if (!(epsilon >= 0.0)) throw ContractError("quantization epsilon must be nonnegative");
  if (epsilon == 0.0) return d;
  Quantizer q(add_terminal_values(d), epsilon);
  AddManager& mgr = *d.manager;
  mgr.clear_caches();
  return Add{&mgr, mgr.map_terminals(d.root, [&](NodeId t) { return q(mgr.value(t)); }), d.scope};
}

std::size_t add_node_count(const Add& d) { return d.manager->reachable(d.root).size(); }

std::vector<std::string> add_check_reduced(const Add& d) {
  const AddManager& mgr = *d.manager;
  std::vector<std::string> problems;
  std::set<std::pair<VarId, std::vector<NodeId>>> seen_nodes;
  std::set<double> seen_values;
  for (NodeId n : mgr.reachable(d.root)) {
    if (mgr.is_terminal(n)) {
      if (!seen_values.insert(mgr.value(n)).second) {
        problems.push_back("duplicate terminal value " + std::to_string(mgr.value(n)));
      }
      continue;
    }
    auto kids = mgr.children(n);
    std::vector<NodeId> k(kids.begin(), kids.end());
    if (std::all_of(k.begin(), k.end(), [&](NodeId c) { return c == k[0]; })) {
      problems.push_back("node " + std::to_string(n) + " has identical children");
    }
    for (NodeId c : k) {
      if (mgr.level(c) <= mgr.level(n)) problems.push_back("node " + std::to_string(n) + " breaks the order");
    }
    if (!seen_nodes.emplace(mgr.var(n), k).second) {
      problems.push_back("node " + std::to_string(n) + " duplicates another node");
    }
  }
  return problems;
}

std::string add_to_dot(const Add& d) {
  const AddManager& mgr = *d.manager;
  std::ostringstream out;
  out << "digraph add {\n";
  for (NodeId n : mgr.reachable(d.root)) {
    if (mgr.is_terminal(n)) {
      out << "  n" << n << " [shape=box,label=\"" << mgr.value(n) << "\"];\n";
      continue;
    }
    out << "  n" << n << " [label=\"x" << mgr.var(n) << "\"];\n";
    auto kids = mgr.children(n);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      out << "  n" << n << " -> n" << kids[i] << " [label=\"" << i << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace smp
