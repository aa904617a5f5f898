#include "smp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "smp/errors.hpp"
#include "smp/ordering.hpp"
#include "smp/quantize.hpp"

namespace smp {

const char* to_string(ReprKind kind) {
  switch (kind) {
    case ReprKind::kDense:
      return "dense";
    case ReprKind::kSparse:
      return "sparse";
    case ReprKind::kAdd:
      return "add";
  }
  return "?";
}

const char* to_string(Schedule schedule) {
  return schedule == Schedule::kSumProduct ? "sum_product" : "belief_update";
}

void validate(const EngineConfig& config) {
  if (!(config.epsilon >= 0.0)) throw ContractError("epsilon must be nonnegative");
  if (config.max_iterations < 1) throw ContractError("max_iterations must be positive");
  if (!(config.tolerance > 0.0)) throw ContractError("tolerance must be positive");
  if (!(config.damping >= 0.0 && config.damping < 1.0)) throw ContractError("damping must lie in [0, 1)");
  if (config.time_limit_ms < 0.0) throw ContractError("time limit must be nonnegative");
}

DenseFactor DenseBackend::constant(const Scope& vars, double x) {
  std::vector<int> cards;
  for (VarId v : vars) cards.push_back(cards_[static_cast<std::size_t>(v)]);
  return DenseFactor::constant(vars, std::move(cards), x);
}

DenseFactor DenseBackend::scale(const DenseFactor& f, double x) {
  DenseFactor out = f;
  for (double& v : out.mutable_values()) v *= x;
  stats.visits += out.size();
  return out;
}

DenseFactor DenseBackend::quantize(const DenseFactor& f, double epsilon) {
  DenseFactor out = f;
  quantize_in_place(out.mutable_values(), epsilon);
  stats.visits += out.size();
  return out;
}

SparseTable SparseBackend::constant(const Scope& vars, double x) {
  std::vector<int> cards;
  for (VarId v : vars) cards.push_back(cards_[static_cast<std::size_t>(v)]);
  SparseTable out(vars, std::move(cards));
  if (x != 0.0) {
    for (TupleKey k = 0; k < out.codec().space_size(); ++k) out.set(k, x);
  }
  stats.visits += out.size();
  return out;
}

SparseTable SparseBackend::scale(const SparseTable& f, double x) {
  SparseTable out(f.scope(), f.cards());
  for (const auto& [k, v] : f.entries()) out.set(k, v * x);
  stats.visits += f.size();
  return out;
}

SparseTable SparseBackend::quantize(const SparseTable& f, double epsilon) {
  if (epsilon == 0.0) return f;
  std::vector<double> values;
  values.reserve(f.size());
  for (const auto& [k, v] : f.entries()) values.push_back(v);
  Quantizer q(std::move(values), epsilon);
  SparseTable out(f.scope(), f.cards());
  for (const auto& [k, v] : f.entries()) out.set(k, q(v));
  stats.visits += f.size();
  return out;
}

AddBackend::AddBackend(const GraphicalModel& model)
    : manager_(std::make_unique<AddManager>(VarOrder(min_fill_order(model).order), model.cardinalities())) {}

Add AddBackend::scale(const Add& f, double x) {
  manager_->clear_caches();
  return Add{manager_.get(), manager_->map_terminals(f.root, [&](NodeId t) { return manager_->value(t) * x; }),
             f.scope};
}

namespace {

using Clock = std::chrono::steady_clock;

// Slot of the message sent by `from` over edge `e`.
int slot(const ClusterEdge& e, int from) { return e.a == from ? 0 : 1; }

int other_end(const ClusterEdge& e, int v) { return e.a == v ? e.b : e.a; }

template <Representation B>
typename B::Function finish_message(StructuredClusterGraph<B>& scg, typename B::Function msg, int edge, int from,
                                    double epsilon) {
  auto& be = scg.backend;
  const auto& e = scg.graph.edge(edge);
  const auto& mask = scg.edge_mask[static_cast<std::size_t>(edge)];
  if (mask) msg = be.restrict_to(msg, *mask);
  double total = be.total(msg);
  if (!(total > 0.0)) {
    throw SupportStarvationError(from, other_end(e, from),
                                 "message " + std::to_string(from) + " -> " + std::to_string(other_end(e, from)) +
                                     " is zero on its whole support");
  }
  msg = be.scale(msg, 1.0 / total);
  if (epsilon > 0.0) {
    msg = be.quantize(msg, epsilon);
    msg = be.scale(msg, 1.0 / be.total(msg));
  }
  return msg;
}

template <Representation B>
typename B::Function unrestricted_message(StructuredClusterGraph<B>& scg, int edge, int from) {
  auto& be = scg.backend;
  auto prod = scg.potentials[static_cast<std::size_t>(from)];
  for (auto [nb, e2] : scg.adjacency[static_cast<std::size_t>(from)]) {
    if (e2 == edge) continue;
    prod = be.product(prod, scg.messages[static_cast<std::size_t>(e2)][static_cast<std::size_t>(slot(scg.graph.edge(e2), nb))]);
  }
  return be.sum_out(prod, scope_difference(be.scope(prod), scg.graph.edge(edge).label));
}

template <Representation B>
typename B::Function cluster_belief(StructuredClusterGraph<B>& scg, int v) {
  if (!scg.beliefs.empty()) return scg.beliefs[static_cast<std::size_t>(v)];
  auto& be = scg.backend;
  auto prod = scg.potentials[static_cast<std::size_t>(v)];
  for (auto [nb, e] : scg.adjacency[static_cast<std::size_t>(v)]) {
    prod = be.product(prod, scg.messages[static_cast<std::size_t>(e)][static_cast<std::size_t>(slot(scg.graph.edge(e), nb))]);
  }
  return prod;
}

template <Representation B>
double function_diff(B& be, const typename B::Function& a, const typename B::Function& b) {
  return max_abs_diff(be.to_dense(a), be.to_dense(b));
}

template <Representation B>
typename B::Function damp(StructuredClusterGraph<B>& scg, int edge, const typename B::Function& old_msg,
                          const typename B::Function& new_msg, double lambda) {
  auto& be = scg.backend;
  DenseFactor o = be.to_dense(old_msg);
  DenseFactor n = be.to_dense(new_msg);
  auto& nv = n.mutable_values();
  for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = lambda * o[i] + (1.0 - lambda) * nv[i];
  auto out = be.from_dense(n);
  const auto& mask = scg.edge_mask[static_cast<std::size_t>(edge)];
  if (mask) out = be.restrict_to(out, *mask);
  return be.scale(out, 1.0 / be.total(out));
}

template <Representation B>
std::size_t footprint(StructuredClusterGraph<B>& scg) {
  auto& be = scg.backend;
  std::size_t bytes = be.shared_bytes();
  for (const auto& f : scg.potentials) bytes += be.bytes(f);
  for (const auto& m : scg.messages) bytes += be.bytes(m[0]) + be.bytes(m[1]);
  for (const auto& f : scg.beliefs) bytes += be.bytes(f);
  for (const auto& f : scg.sepsets) bytes += be.bytes(f);
  return bytes;
}

// Directed sends (edge, from) of one collect/distribute pass per tree.
std::vector<std::pair<int, int>> two_pass_schedule(const ClusterGraph& g,
                                                   const std::vector<std::vector<std::pair<int, int>>>& adj) {
  const std::size_t n = g.num_vertices();
  std::vector<int> parent_edge(n, -1);
  std::vector<bool> seen(n, false);
  std::vector<int> bfs;
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::size_t head = bfs.size();
    bfs.push_back(static_cast<int>(root));
    while (head < bfs.size()) {
      int v = bfs[head++];
      for (auto [nb, e] : adj[static_cast<std::size_t>(v)]) {
        if (seen[static_cast<std::size_t>(nb)]) continue;
        seen[static_cast<std::size_t>(nb)] = true;
        parent_edge[static_cast<std::size_t>(nb)] = e;
        bfs.push_back(nb);
      }
    }
  }
  std::vector<std::pair<int, int>> sends;
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    int pe = parent_edge[static_cast<std::size_t>(*it)];
    if (pe >= 0) sends.emplace_back(pe, *it);
  }
  for (int v : bfs) {
    for (auto [nb, e] : adj[static_cast<std::size_t>(v)]) {
      if (parent_edge[static_cast<std::size_t>(nb)] == e) sends.emplace_back(e, v);
    }
  }
  return sends;
}

template <Representation B>
void init_belief_update(StructuredClusterGraph<B>& scg) {
  auto& be = scg.backend;
  scg.sepsets.clear();
  for (const auto& m : scg.messages) scg.sepsets.push_back(m[0]);
  scg.beliefs = scg.potentials;
  for (std::size_t e = 0; e < scg.graph.num_edges(); ++e) {
    const auto& edge = scg.graph.edge(static_cast<int>(e));
    for (int v : {edge.a, edge.b}) {
      scg.beliefs[static_cast<std::size_t>(v)] = be.product(scg.beliefs[static_cast<std::size_t>(v)], scg.sepsets[e]);
    }
  }
}

// Hugin update; returns the largest change of the sepset.
template <Representation B>
double belief_update_send(StructuredClusterGraph<B>& scg, int edge, int from, const EngineConfig& config) {
  auto& be = scg.backend;
  const auto& e = scg.graph.edge(edge);
  const int to = other_end(e, from);
  const auto& belief = scg.beliefs[static_cast<std::size_t>(from)];
  auto sigma = be.sum_out(belief, scope_difference(be.scope(belief), e.label));
  sigma = finish_message(scg, std::move(sigma), edge, from, config.epsilon);
  auto& old = scg.sepsets[static_cast<std::size_t>(edge)];
  if (config.damping > 0.0) sigma = damp(scg, edge, old, sigma, config.damping);
  auto updated = be.divide(be.product(scg.beliefs[static_cast<std::size_t>(to)], sigma), old);
  double total = be.total(updated);
  if (!(total > 0.0)) {
    throw SupportStarvationError(from, to, "belief of cluster " + std::to_string(to) + " vanished");
  }
  scg.beliefs[static_cast<std::size_t>(to)] = be.scale(updated, 1.0 / total);
  double diff = function_diff(be, old, sigma);
  old = std::move(sigma);
  return diff;
}

}  // namespace

template <Representation B>
StructuredClusterGraph<B> initialize_scg(const GraphicalModel& model, const ClusterGraph& graph,
                                         const SampleSet* samples, B backend, bool augment) {
  StructuredClusterGraph<B> scg{graph, {}, std::move(backend)};
  if (scg.graph.factor_vertex().size() != model.num_factors()) scg.graph = assign_factors(model, scg.graph);
  auto& be = scg.backend;
  const auto& g = scg.graph;
  scg.lossy = samples != nullptr;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) scg.adjacency.push_back(g.neighbors(static_cast<int>(v)));

  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const Scope& label = g.label(static_cast<int>(v));
    const std::vector<int> assigned = g.factors_of(static_cast<int>(v));
    auto pot = be.constant(label, 1.0);
    for (int f : assigned) pot = be.product(pot, be.from_dense(model.factor(static_cast<std::size_t>(f))));
    std::optional<SupportRelation> support;
    if (samples) {
      support = project_samples(*samples, label, model.cardinalities());
      if (augment) support = augment_support(*support, model, assigned, *samples);
      pot = be.restrict_to(pot, be.mask(*support));
    }
    if (!(be.total(pot) > 0.0)) {
      throw EmptyBeliefError(static_cast<int>(v), "cluster " + std::to_string(v) + " has an all-zero potential on its support");
    }
    scg.potentials.push_back(std::move(pot));
    scg.vertex_support.push_back(std::move(support));
  }

  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edge(static_cast<int>(e));
    auto init = be.constant(edge.label, 1.0);
    std::optional<SupportRelation> support;
    std::optional<typename B::Mask> mask;
    if (samples) {
      support = scg.vertex_support[static_cast<std::size_t>(edge.a)]->project(edge.label).merged(
          scg.vertex_support[static_cast<std::size_t>(edge.b)]->project(edge.label));
      mask = be.mask(*support);
      init = be.restrict_to(init, *mask);
    }
    init = be.scale(init, 1.0 / be.total(init));
    scg.messages.push_back({init, init});
    scg.edge_support.push_back(std::move(support));
    scg.edge_mask.push_back(std::move(mask));
  }
  return scg;
}

template <Representation B>
typename B::Function compute_message(StructuredClusterGraph<B>& scg, int edge, int from, double epsilon) {
  return finish_message(scg, unrestricted_message(scg, edge, from), edge, from, epsilon);
}

template <Representation B>
PropagationResult run_propagation(StructuredClusterGraph<B>& scg, const EngineConfig& config) {
  validate(config);
  PropagationResult result;
  const auto& g = scg.graph;
  const bool belief_update = config.schedule == Schedule::kBeliefUpdate;
  if (belief_update) init_belief_update(scg);

  if (g.is_forest()) {
    for (auto [e, from] : two_pass_schedule(g, scg.adjacency)) {
      if (belief_update) {
        belief_update_send(scg, e, from, config);
      } else {
        scg.messages[static_cast<std::size_t>(e)][static_cast<std::size_t>(slot(g.edge(e), from))] =
            compute_message(scg, e, from, config.epsilon);
      }
      ++result.sends;
    }
    result.converged = true;
    result.iterations = 1;
    return result;
  }

  std::vector<std::pair<int, int>> order;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    for (auto [nb, e] : scg.adjacency[v]) order.emplace_back(e, static_cast<int>(v));
  }
  const auto start = Clock::now();
  for (int it = 0; it < config.max_iterations; ++it) {
    double change = 0.0;
    if (belief_update) {
      for (auto [e, from] : order) change = std::max(change, belief_update_send(scg, e, from, config));
    } else {
      auto next = scg.messages;
      for (auto [e, from] : order) {
        auto& target = next[static_cast<std::size_t>(e)][static_cast<std::size_t>(slot(g.edge(e), from))];
        const auto& old = scg.messages[static_cast<std::size_t>(e)][static_cast<std::size_t>(slot(g.edge(e), from))];
        target = compute_message(scg, e, from, config.epsilon);
        if (config.damping > 0.0) target = damp(scg, e, old, target, config.damping);
        change = std::max(change, function_diff(scg.backend, old, target));
      }
      scg.messages = std::move(next);
    }
    result.sends += order.size();
    result.iterations = it + 1;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
    const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if ((config.time_limit_ms > 0.0 && elapsed > config.time_limit_ms) ||
        (config.memory_limit_bytes > 0 && footprint(scg) > config.memory_limit_bytes)) {
      result.limit_reached = true;
      break;
    }
  }
  return result;
}

template <Representation B>
Marginals extract_marginals(StructuredClusterGraph<B>& scg, const GraphicalModel& model) {
  auto& be = scg.backend;
  const auto& g = scg.graph;
  Marginals out;
  std::map<int, typename B::Function> beliefs;
  for (std::size_t x = 0; x < model.num_variables(); ++x) {
    const VarId var = static_cast<VarId>(x);
    int best = -1;
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      const Scope& l = g.label(static_cast<int>(v));
      if (!std::binary_search(l.begin(), l.end(), var)) continue;
      if (best < 0 || l.size() < g.label(best).size()) best = static_cast<int>(v);
    }
    if (best < 0) throw ContractError("no cluster mentions variable " + std::to_string(x));
    auto it = beliefs.find(best);
    if (it == beliefs.end()) it = beliefs.emplace(best, cluster_belief(scg, best)).first;
    const auto& belief = it->second;
    DenseFactor m = be.to_dense(be.sum_out(belief, scope_difference(be.scope(belief), {var})));
    std::vector<double> p = m.values();
    double total = m.sum();
    bool flagged = !(total > 0.0);
    for (double& v : p) v = flagged ? 1.0 / static_cast<double>(p.size()) : v / total;
    out.p.push_back(std::move(p));
    out.flagged.push_back(flagged);
  }
  return out;
}

template <Representation B>
std::vector<double> edge_projection_kl(StructuredClusterGraph<B>& scg) {
  auto& be = scg.backend;
  std::vector<double> out;
  for (std::size_t e = 0; e < scg.graph.num_edges(); ++e) {
    const auto& edge = scg.graph.edge(static_cast<int>(e));
    for (int from : {edge.a, edge.b}) {
      auto raw = unrestricted_message(scg, static_cast<int>(e), from);
      auto projected = raw;
      if (scg.edge_mask[e]) projected = be.restrict_to(raw, *scg.edge_mask[e]);
      DenseFactor p = be.to_dense(raw);
      DenseFactor q = be.to_dense(projected);
      if (!(p.sum() > 0.0) || !(q.sum() > 0.0)) {
        out.push_back(std::numeric_limits<double>::infinity());
      } else {
        out.push_back(kl_divergence(p, q));
      }
    }
  }
  return out;
}

#define SMP_INSTANTIATE(B)                                                                                      \
  template StructuredClusterGraph<B> initialize_scg<B>(const GraphicalModel&, const ClusterGraph&,              \
                                                       const SampleSet*, B, bool);                              \
  template B::Function compute_message<B>(StructuredClusterGraph<B>&, int, int, double);                        \
  template PropagationResult run_propagation<B>(StructuredClusterGraph<B>&, const EngineConfig&);               \
  template Marginals extract_marginals<B>(StructuredClusterGraph<B>&, const GraphicalModel&);                   \
  template std::vector<double> edge_projection_kl<B>(StructuredClusterGraph<B>&);

SMP_INSTANTIATE(DenseBackend)
SMP_INSTANTIATE(SparseBackend)
SMP_INSTANTIATE(AddBackend)

#undef SMP_INSTANTIATE

namespace {

Marginals uniform_flagged(const GraphicalModel& model) {
  Marginals m;
  for (std::size_t v = 0; v < model.num_variables(); ++v) {
    const int card = model.cardinality(static_cast<VarId>(v));
    m.p.emplace_back(static_cast<std::size_t>(card), 1.0 / card);
    m.flagged.push_back(true);
  }
  return m;
}

template <Representation B>
void run_with(const GraphicalModel& model, const ClusterGraph& graph, const SampleSet* samples,
              const EngineConfig& config, B backend, RunResult& result) {
  try {
    auto scg = initialize_scg(model, graph, samples, std::move(backend), config.augment_support);
    result.propagation = run_propagation(scg, config);
    result.marginals = extract_marginals(scg, model);
    result.visits = scg.backend.stats.visits;
  } catch (const SupportStarvationError& e) {
    result.warnings.push_back(std::string("support starvation: ") + e.what());
    result.marginals = uniform_flagged(model);
  }
}

}  // namespace

RunResult run_on_graph(const GraphicalModel& model, const ClusterGraph& graph,
                       const std::optional<SamplerConfig>& sampler, const EngineConfig& config, ReprKind kind) {
  validate(config);
  const auto start = Clock::now();
  RunResult result;
  result.clusters = graph.num_vertices();
  std::optional<SampleSet> samples;
  if (sampler) {
    samples = generate_samples(model, *sampler);
    result.seed = sampler->seed;
    result.acceptance_rate = samples->acceptance_rate;
  }
  const SampleSet* s = samples ? &*samples : nullptr;
  switch (kind) {
    case ReprKind::kDense:
      run_with(model, graph, s, config, DenseBackend(model.cardinalities()), result);
      break;
    case ReprKind::kSparse:
      run_with(model, graph, s, config, SparseBackend(model.cardinalities()), result);
      break;
    case ReprKind::kAdd:
      run_with(model, graph, s, config, AddBackend(model), result);
      break;
  }
  result.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return result;
}

RunResult run_algorithm_1(const GraphicalModel& model, const JoinGraphParams& params,
                          const std::optional<SamplerConfig>& sampler, const EngineConfig& config, ReprKind kind) {
  const auto start = Clock::now();
  ClusterGraph graph = build_join_graph(model, params);
  RunResult result = run_on_graph(model, graph, sampler, config, kind);
  result.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return result;
}

std::string format_marginals(const Marginals& m, const MarginalsHeader& header) {
  std::ostringstream out;
  out << "# seed " << (header.seed ? std::to_string(*header.seed) : std::string("none")) << '\n';
  out << "# iterations " << header.iterations << '\n';
  out << "# converged " << (header.converged ? "yes" : "no") << '\n';
  char buf[32];
  for (std::size_t v = 0; v < m.p.size(); ++v) {
    out << "var " << v << " :";
    for (double p : m.p[v]) {
      std::snprintf(buf, sizeof buf, " %.10g", p);
      out << buf;
    }
    if (m.flagged[v]) out << " FLAGGED";
    out << '\n';
  }
  return out.str();
}

}  // namespace smp
