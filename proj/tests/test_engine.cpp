#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "smp/engine.hpp"
#include "smp/errors.hpp"
#include "smp/eval.hpp"
#include "smp/exact.hpp"

using namespace smp;

namespace {

// Clusters {A, B} and {B} joined on B; both factors land in {A, B}.
ClusterGraph two_cluster_chain() {
  ClusterGraph g;
  g.add_vertex({0, 1});
  g.add_vertex({1});
  g.add_edge(0, 1, {1});
  return g;
}

template <class B>
void check_chain_message(B backend) {
  GraphicalModel m = fixtures::two_var_model();
  auto scg = initialize_scg(m, two_cluster_chain(), nullptr, std::move(backend));
  DenseFactor msg = scg.backend.to_dense(compute_message(scg, 0, 0, 0.0));
  CHECK(msg.scope() == Scope{1});
  CHECK(msg[0] == doctest::Approx(0.4));
  CHECK(msg[1] == doctest::Approx(0.6));
}

}  // namespace

TEST_CASE("message along a chain edge") {
  GraphicalModel m = fixtures::two_var_model();
  check_chain_message(DenseBackend(m.cardinalities()));
  check_chain_message(SparseBackend(m.cardinalities()));
  check_chain_message(AddBackend(m));
}

TEST_CASE("lossless propagation on a tree is exact") {
  GraphicalModel m = fixtures::two_var_model();
  for (ReprKind kind : {ReprKind::kDense, ReprKind::kSparse, ReprKind::kAdd}) {
    for (Schedule s : {Schedule::kSumProduct, Schedule::kBeliefUpdate}) {
      EngineConfig c;
      c.schedule = s;
      RunResult r = run_on_graph(m, two_cluster_chain(), std::nullopt, c, kind);
      CHECK(r.marginals.p[0][0] == doctest::Approx(0.8));
      CHECK(r.marginals.p[1][0] == doctest::Approx(0.4));
      CHECK(r.propagation.converged);
      CHECK(r.propagation.iterations == 1);
      CHECK(r.propagation.sends == 2);
      CHECK_FALSE(r.seed.has_value());
    }
  }
}

TEST_CASE("lossless propagation matches exact inference on random models") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    RandomModelParams p;
    p.variables = 7;
    p.factors = 9;
    p.max_cardinality = 3;
    p.zero_probability = 0.2;
    p.seed = seed;
    GraphicalModel m = generate_random_model(p);
    ExactResult exact = bruteforce_marginals(m);
    ClusterGraph tree = build_junction_tree(m);
    for (ReprKind kind : {ReprKind::kDense, ReprKind::kSparse, ReprKind::kAdd}) {
      for (Schedule s : {Schedule::kSumProduct, Schedule::kBeliefUpdate}) {
        EngineConfig c;
        c.schedule = s;
        RunResult r = run_on_graph(m, tree, std::nullopt, c, kind);
        CHECK(fixtures::max_diff(r.marginals.p, exact.marginals) < 1e-9);
      }
    }
  }
}

TEST_CASE("loopy propagation converges on a weakly coupled grid") {
  GraphicalModel m = generate_ising({3, 3, 0.2, 0.1, 4});
  ExactResult exact = exact_marginals(m);
  EngineConfig c;
  c.max_iterations = 200;
  for (Schedule s : {Schedule::kSumProduct, Schedule::kBeliefUpdate}) {
    c.schedule = s;
    RunResult r = run_algorithm_1(m, {2, EdgeLabels::kMinimal}, std::nullopt, c, ReprKind::kDense);
    CHECK(r.propagation.converged);
    CHECK(r.propagation.iterations > 1);
    CHECK(fixtures::max_diff(r.marginals.p, exact.marginals) < 0.05);
  }
}

TEST_CASE("representations agree on sampled supports") {
  RandomModelParams p;
  p.variables = 10;
  p.factors = 14;
  p.zero_probability = 0.3;
  p.seed = 9;
  GraphicalModel m = generate_random_model(p);
  SamplerConfig sc;
  sc.method = SamplerMethod::kImportance;
  sc.k = 64;
  sc.seed = 5;
  EngineConfig c;
  RunResult dense = run_algorithm_1(m, {3, EdgeLabels::kMinimal}, sc, c, ReprKind::kDense);
  RunResult sparse = run_algorithm_1(m, {3, EdgeLabels::kMinimal}, sc, c, ReprKind::kSparse);
  RunResult add = run_algorithm_1(m, {3, EdgeLabels::kMinimal}, sc, c, ReprKind::kAdd);
  REQUIRE(dense.warnings.empty());
  CHECK(dense.seed == std::optional<std::uint64_t>(5));
  CHECK(fixtures::max_diff(dense.marginals.p, sparse.marginals.p) < 1e-9);
  CHECK(fixtures::max_diff(dense.marginals.p, add.marginals.p) < 1e-9);
}

TEST_CASE("edge projection divergence vanishes without sampling") {
  GraphicalModel m = fixtures::two_var_model();
  auto scg = initialize_scg(m, two_cluster_chain(), nullptr, DenseBackend(m.cardinalities()));
  run_propagation(scg, EngineConfig{});
  for (double kl : edge_projection_kl(scg)) CHECK(kl == doctest::Approx(0.0));
}

TEST_CASE("an empty support intersection starves a message") {
  // chain A - B - C - D; the samples disagree on B between the first two clusters
  GraphicalModel m({2, 2, 2, 2}, {DenseFactor({0, 1}, {2, 2}, {1, 0, 1, 1}), DenseFactor({1, 2}, {2, 2}, {0, 1, 1, 1}),
                                  DenseFactor::constant({2, 3}, {2, 2}, 1.0)});
  SampleSet s;
  s.samples = {{0, 0, 0, 0}, {0, 1, 0, 0}};
  auto scg = initialize_scg(m, build_junction_tree(m), &s, SparseBackend(m.cardinalities()), false);
  CHECK_THROWS_AS(run_propagation(scg, EngineConfig{}), SupportStarvationError);
}

TEST_CASE("a support avoiding every nonzero entry is an empty belief") {
  GraphicalModel m({2}, {DenseFactor({0}, {2}, {1, 0})});
  SampleSet s;
  s.samples = {{1}};
  CHECK_THROWS_AS(initialize_scg(m, build_junction_tree(m), &s, DenseBackend(m.cardinalities()), false),
                  EmptyBeliefError);
}

TEST_CASE("quantized messages stay within epsilon of the exact ones") {
  GraphicalModel m = fixtures::two_var_model();
  auto scg = initialize_scg(m, two_cluster_chain(), nullptr, AddBackend(m));
  DenseFactor q = scg.backend.to_dense(compute_message(scg, 0, 0, 0.25));
  // 0.4 and 0.6 fall in one bin
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(0.5));
}

TEST_CASE("engine configuration is checked") {
  EngineConfig c;
  c.damping = 1.0;
  CHECK_THROWS_AS(validate(c), ContractError);
  c = {};
  c.epsilon = -1;
  CHECK_THROWS_AS(validate(c), ContractError);
  c = {};
  c.max_iterations = 0;
  CHECK_THROWS_AS(validate(c), ContractError);
}

TEST_CASE("marginal text format") {
  Marginals m{{{0.8, 0.2}, {0.5, 0.5}}, {false, true}};
  CHECK(format_marginals(m, {std::nullopt, 1, true}) ==
        "# seed none\n# iterations 1\n# converged yes\nvar 0 : 0.8 0.2\nvar 1 : 0.5 0.5 FLAGGED\n");
  CHECK(format_marginals(m, {7, 12, false}).rfind("# seed 7\n# iterations 12\n# converged no\n", 0) == 0);
}

TEST_CASE("enum names") {
  CHECK(std::string(to_string(ReprKind::kSparse)) == "sparse");
  CHECK(std::string(to_string(Schedule::kBeliefUpdate)) == "belief_update");
}
