#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smp/add.hpp"
#include "smp/cluster_graph.hpp"
#include "smp/model.hpp"
#include "smp/sampler.hpp"
#include "smp/sparse_table.hpp"

namespace smp {

enum class ReprKind { kDense, kSparse, kAdd };
enum class Schedule { kSumProduct, kBeliefUpdate };

const char* to_string(ReprKind kind);
const char* to_string(Schedule schedule);

struct EngineConfig {
  double epsilon = 0.0;  // absolute bound on normalized message values
  Schedule schedule = Schedule::kSumProduct;
  int max_iterations = 100;
  double tolerance = 1e-6;
  double damping = 0.0;  // new = damping * old + (1 - damping) * new
  bool augment_support = true;
  double time_limit_ms = 0.0;            // 0: unlimited
  std::size_t memory_limit_bytes = 0;    // 0: unlimited
};

void validate(const EngineConfig& config);

// Operations every function representation provides. `Mask` is the form a
// support relation takes when restricting a function to it.
template <class B>
concept Representation = requires(B& b, const typename B::Function& f, const DenseFactor& d,
                                  const SupportRelation& s, const typename B::Mask& m, const Scope& vars, double x) {
  { b.from_dense(d) } -> std::same_as<typename B::Function>;
  { b.constant(vars, x) } -> std::same_as<typename B::Function>;
  { b.mask(s) } -> std::same_as<typename B::Mask>;
  { b.restrict_to(f, m) } -> std::same_as<typename B::Function>;
  { b.product(f, f) } -> std::same_as<typename B::Function>;
  { b.divide(f, f) } -> std::same_as<typename B::Function>;
  { b.sum_out(f, vars) } -> std::same_as<typename B::Function>;
  { b.scale(f, x) } -> std::same_as<typename B::Function>;
  { b.quantize(f, x) } -> std::same_as<typename B::Function>;
  { b.total(f) } -> std::same_as<double>;
  { b.to_dense(f) } -> std::same_as<DenseFactor>;
  { b.scope(f) } -> std::same_as<const Scope&>;
  { b.bytes(f) } -> std::same_as<std::size_t>;
  { b.shared_bytes() } -> std::same_as<std::size_t>;
};

class DenseBackend {
 public:
  using Function = DenseFactor;
  using Mask = DenseFactor;
  explicit DenseBackend(std::vector<int> cards) : cards_(std::move(cards)) {}

  Function from_dense(const DenseFactor& f) { return f; }
  Function constant(const Scope& vars, double x);
  Mask mask(const SupportRelation& s) { return s.indicator(); }
  Function restrict_to(const Function& f, const Mask& m) { return factor_product(f, m, &stats); }
  Function product(const Function& a, const Function& b) { return factor_product(a, b, &stats); }
  Function divide(const Function& a, const Function& b) { return factor_divide(a, b, &stats); }
  Function sum_out(const Function& f, const Scope& vars) { return factor_sum_out(f, vars, &stats); }
  Function scale(const Function& f, double x);
  Function quantize(const Function& f, double epsilon);
  double total(const Function& f) { return f.sum(); }
  DenseFactor to_dense(const Function& f) { return f; }
  const Scope& scope(const Function& f) { return f.scope(); }
  std::size_t bytes(const Function& f) { return f.size() * sizeof(double); }
  std::size_t shared_bytes() { return 0; }

  OpStats stats;

 private:
  std::vector<int> cards_;
};

class SparseBackend {
 public:
  using Function = SparseTable;
  using Mask = SupportRelation;
  explicit SparseBackend(std::vector<int> cards) : cards_(std::move(cards)) {}

  Function from_dense(const DenseFactor& f) { return sparse_from_dense(f, &stats); }
  Function constant(const Scope& vars, double x);
  Mask mask(const SupportRelation& s) { return s; }
  Function restrict_to(const Function& f, const Mask& m) { return sparse_lossy_project(f, m, &stats); }
  Function product(const Function& a, const Function& b) { return sparse_product(a, b, &stats); }
  Function divide(const Function& a, const Function& b) { return sparse_divide(a, b, &stats); }
  Function sum_out(const Function& f, const Scope& vars) { return sparse_sum_out(f, vars, &stats); }
  Function scale(const Function& f, double x);
  Function quantize(const Function& f, double epsilon);
  double total(const Function& f) { return f.sum(); }
  DenseFactor to_dense(const Function& f) { return sparse_to_dense(f); }
  const Scope& scope(const Function& f) { return f.scope(); }
  // unordered_map node: key, value, next pointer, cached hash
  std::size_t bytes(const Function& f) { return f.size() * 32; }
  std::size_t shared_bytes() { return 0; }

  OpStats stats;

 private:
  std::vector<int> cards_;
};

class AddBackend {
 public:
  using Function = Add;
  using Mask = Add;
  // The diagram order is the min-fill elimination order of `model`, with the
  // first-eliminated variable tested at the root.
  explicit AddBackend(const GraphicalModel& model);

  Function from_dense(const DenseFactor& f) { return add_from_dense(*manager_, f); }
  Function constant(const Scope& vars, double x) { return add_constant(*manager_, x, vars); }
  Mask mask(const SupportRelation& s) { return add_from_support(*manager_, s); }
  Function restrict_to(const Function& f, const Mask& m) { return add_apply_product(f, m); }
  Function product(const Function& a, const Function& b) { return add_apply_product(a, b); }
  Function divide(const Function& a, const Function& b) { return add_apply_divide(a, b); }
  Function sum_out(const Function& f, const Scope& vars) { return add_sum_out(f, vars); }
  Function scale(const Function& f, double x);
  Function quantize(const Function& f, double epsilon) { return add_quantize(f, epsilon); }
  double total(const Function& f) { return add_total(f); }
  DenseFactor to_dense(const Function& f) { return add_to_dense(f); }
  const Scope& scope(const Function& f) { return f.scope; }
  std::size_t bytes(const Function&) { return 0; }
  std::size_t shared_bytes() { return manager_->memory_bytes(); }

  AddManager& manager() { return *manager_; }

  OpStats stats;

 private:
  std::unique_ptr<AddManager> manager_;
};

static_assert(Representation<DenseBackend>);
static_assert(Representation<SparseBackend>);
static_assert(Representation<AddBackend>);

/// Cluster graph whose vertices and edges carry functions of one
/// representation. Message slot 0 of an edge holds a->b, slot 1 holds b->a.
/// In lossy mode every vertex and edge function is zero outside its support.
template <Representation B>
struct StructuredClusterGraph {
  ClusterGraph graph;
  std::vector<std::vector<std::pair<int, int>>> adjacency{};  // graph.neighbors(v) per vertex
  B backend;
  bool lossy = false;
  std::vector<typename B::Function> potentials{};
  std::vector<std::optional<SupportRelation>> vertex_support{};
  std::vector<std::optional<SupportRelation>> edge_support{};
  std::vector<std::optional<typename B::Mask>> edge_mask{};
  std::vector<std::array<typename B::Function, 2>> messages{};
  // Belief-update state: cluster beliefs and one sepset function per edge.
  std::vector<typename B::Function> beliefs{};
  std::vector<typename B::Function> sepsets{};
};

// Builds vertex potentials (product of assigned factors restricted to the
// projected sample support) and uniform messages over each edge support. With
// `samples` null every support is full and the run is lossless.
template <Representation B>
StructuredClusterGraph<B> initialize_scg(const GraphicalModel& model, const ClusterGraph& graph,
                                         const SampleSet* samples, B backend, bool augment = true);

// Sum-product message from `from` to `to` over edge `edge`, restricted to the
// edge support, normalized, quantized with `epsilon` and normalized again.
template <Representation B>
typename B::Function compute_message(StructuredClusterGraph<B>& scg, int edge, int from, double epsilon);

struct PropagationResult {
  bool converged = false;
  int iterations = 0;
  std::uint64_t sends = 0;
  bool limit_reached = false;
};

// Forests get one collect/distribute pass (2 sends per edge). Loopy graphs run
// synchronous rounds (sum-product) or sequential sweeps (belief-update) over
// directed edges ordered by (vertex, neighbor).
template <Representation B>
PropagationResult run_propagation(StructuredClusterGraph<B>& scg, const EngineConfig& config);

struct Marginals {
  std::vector<std::vector<double>> p;
  // All-zero belief replaced by uniform.
  std::vector<bool> flagged;
};

template <Representation B>
Marginals extract_marginals(StructuredClusterGraph<B>& scg, const GraphicalModel& model);

// KL between each directed edge's message before and after restriction to the
// edge support; finite everywhere when the support covers the message.
template <Representation B>
std::vector<double> edge_projection_kl(StructuredClusterGraph<B>& scg);

struct RunResult {
  Marginals marginals;
  std::optional<std::uint64_t> seed;  // empty for lossless runs
  PropagationResult propagation;
  double wall_ms = 0.0;
  double acceptance_rate = 1.0;
  std::uint64_t visits = 0;
  std::size_t clusters = 0;
  std::vector<std::string> warnings;
};

// Samples (unless `sampler` is empty), initializes, propagates and extracts on
// a given cluster graph. Support starvation becomes a warning with flagged
// uniform marginals.
RunResult run_on_graph(const GraphicalModel& model, const ClusterGraph& graph,
                       const std::optional<SamplerConfig>& sampler, const EngineConfig& config, ReprKind kind);

// Same over the join graph built with `params`.
RunResult run_algorithm_1(const GraphicalModel& model, const JoinGraphParams& params,
                          const std::optional<SamplerConfig>& sampler, const EngineConfig& config, ReprKind kind);

struct MarginalsHeader {
  std::optional<std::uint64_t> seed;
  int iterations = 0;
  bool converged = false;
};

// "# seed S", "# iterations N", "# converged yes|no", then one
// "var <i> : p0 p1 ..." line per variable, suffixed with FLAGGED when flagged.
std::string format_marginals(const Marginals& m, const MarginalsHeader& header);

}  // namespace smp
