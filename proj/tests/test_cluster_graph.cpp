#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "smp/cluster_graph.hpp"
#include "smp/errors.hpp"
#include "smp/eval.hpp"

using namespace smp;

namespace {

DenseFactor ones(Scope scope) {
  std::vector<int> cards(scope.size(), 2);
  return DenseFactor::constant(std::move(scope), std::move(cards), 1.0);
}

GraphicalModel chain3() { return GraphicalModel({2, 2, 2}, {ones({0, 1}), ones({1, 2})}); }

GraphicalModel cycle4() { return GraphicalModel({2, 2, 2, 2}, {ones({0, 1}), ones({1, 2}), ones({2, 3}), ones({0, 3})}); }

std::set<Scope> cluster_set(const ClusterGraph& g) { return {g.labels().begin(), g.labels().end()}; }

}  // namespace

TEST_CASE("junction tree of a chain") {
  ClusterGraph t = build_junction_tree(chain3());
  CHECK(cluster_set(t) == std::set<Scope>{{0, 1}, {1, 2}});
  REQUIRE(t.num_edges() == 1);
  CHECK(t.edge(0).label == Scope{1});
  CHECK(t.is_forest());
  CHECK(validate_cluster_graph(chain3(), t).empty());
  REQUIRE(t.factor_vertex().size() == 2);
  CHECK(t.label(t.factor_vertex()[0]) == Scope{0, 1});
  CHECK(t.label(t.factor_vertex()[1]) == Scope{1, 2});
}

TEST_CASE("junction tree of a cycle has width two") {
  ClusterGraph t = build_junction_tree(cycle4());
  CHECK(t.is_forest());
  CHECK(t.max_cluster_size() == 3);
  CHECK(validate_cluster_graph(cycle4(), t).empty());
  CHECK_THROWS_AS(build_junction_tree(cycle4(), 1), CapError);
}

TEST_CASE("an isolated variable gets its own cluster") {
  GraphicalModel m({2, 2, 2}, {ones({0, 1})});
  ClusterGraph t = build_junction_tree(m);
  CHECK(t.components() == 2);
  CHECK(cluster_set(t).count(Scope{2}) == 1);
  ClusterGraph j = build_join_graph(m, {});
  CHECK(cluster_set(j).count(Scope{2}) == 1);
  CHECK(validate_cluster_graph(m, j).empty());
}

TEST_CASE("join graphs respect the i-bound and running intersection") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    RandomModelParams p;
    p.variables = 12;
    p.factors = 18;
    p.seed = seed;
    GraphicalModel m = generate_random_model(p);
    for (int ib : {3, 4, 6}) {
      for (EdgeLabels labels : {EdgeLabels::kMinimal, EdgeLabels::kFullIntersection}) {
        ClusterGraph g = build_join_graph(m, {ib, labels});
        CHECK(g.max_cluster_size() <= static_cast<std::size_t>(ib));
        if (labels == EdgeLabels::kMinimal) CHECK(validate_cluster_graph(m, g).empty());
      }
    }
  }
}

TEST_CASE("a large i-bound gives a tree") {
  GraphicalModel m = cycle4();
  ClusterGraph g = build_join_graph(m, {10, EdgeLabels::kMinimal});
  CHECK(g.is_forest());
  CHECK(validate_cluster_graph(m, g).empty());
}

TEST_CASE("small i-bounds split into mini-buckets") {
  GraphicalModel m = generate_ising({4, 4, 0.5, 0.2, 1});
  ClusterGraph g = build_join_graph(m, {2, EdgeLabels::kMinimal});
  CHECK(g.max_cluster_size() <= 2);
  CHECK_FALSE(g.is_forest());
  CHECK(validate_cluster_graph(m, g).empty());
}

TEST_CASE("the i-bound must cover every factor") {
  GraphicalModel m({2, 2, 2}, {ones({0, 1, 2})});
  CHECK_THROWS_AS(build_join_graph(m, {2, EdgeLabels::kMinimal}), ConstructionError);
  CHECK_THROWS_AS(build_join_graph(m, {0, EdgeLabels::kMinimal}), ConstructionError);
}

TEST_CASE("running intersection violations are reported") {
  SUBCASE("label outside an endpoint") {
    ClusterGraph g;
    g.add_vertex({0, 1});
    g.add_vertex({1, 2});
    g.add_edge(0, 1, {0});
    CHECK_FALSE(validate_running_intersection(g).empty());
  }
  SUBCASE("disconnected occurrences") {
    ClusterGraph g;
    g.add_vertex({0, 1});
    g.add_vertex({1, 2});
    g.add_vertex({0, 2});
    g.add_edge(0, 1, {1});
    g.add_edge(1, 2, {2});
    auto v = validate_running_intersection(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].var == 0);
  }
  SUBCASE("a cycle carrying one variable") {
    ClusterGraph g;
    g.add_vertex({0, 1});
    g.add_vertex({0, 2});
    g.add_vertex({0, 3});
    g.add_edge(0, 1, {0});
    g.add_edge(1, 2, {0});
    g.add_edge(0, 2, {0});
    auto v = validate_running_intersection(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].var == 0);
    minimize_edge_labels(g);
    CHECK(validate_running_intersection(g).empty());
  }
  SUBCASE("an uncovered factor") {
    ClusterGraph g;
    g.add_vertex({0, 1});
    g.add_vertex({2});
    GraphicalModel m({2, 2, 2}, {ones({1, 2})});
    CHECK_FALSE(validate_cluster_graph(m, g).empty());
  }
}

TEST_CASE("factors go to the smallest covering cluster") {
  ClusterGraph g;
  g.add_vertex({0, 1, 2});
  g.add_vertex({0, 1});
  g.add_vertex({1, 2});
  g.add_edge(0, 1, {0, 1});
  g.add_edge(0, 2, {1, 2});
  GraphicalModel m({2, 2, 2}, {ones({0, 1}), ones({1}), ones({0, 2})});
  ClusterGraph a = assign_factors(m, g);
  CHECK(a.factor_vertex() == std::vector<int>{1, 1, 0});
  CHECK(a.factors_of(1) == std::vector<int>{0, 1});
}

TEST_CASE("dump format") {
  ClusterGraph t = build_junction_tree(chain3());
  CHECK(dump_cluster_graph(t) ==
        "clusters 2\ncluster 0 : 0 1\ncluster 1 : 1 2\nedges 1\nedge 0 1 : 1\nfactors 2\nfactor 0 -> 0\n"
        "factor 1 -> 1\n");
}
