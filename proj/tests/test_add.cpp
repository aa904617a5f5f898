#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "smp/add.hpp"
#include "smp/errors.hpp"
#include "smp/ordering.hpp"

using namespace smp;

namespace {

// Leaf value -> number of assignments reaching it.
std::map<double, std::uint64_t> counts_by_value(const Add& d) {
  std::map<double, std::uint64_t> out;
  for (auto [t, n] : leaf_model_counts(d, d.scope)) out[d.manager->value(t)] += n;
  return out;
}

}  // namespace

TEST_CASE("leaf model counts of F1") {
  AddManager mgr(VarOrder({0, 1}), {2, 2});
  Add d = add_from_dense(mgr, fixtures::f1());
  CHECK(counts_by_value(d) == std::map<double, std::uint64_t>{{0.0, 1}, {2.0, 1}, {3.0, 2}});
  CHECK(add_total(d) == 8.0);
  CHECK(add_check_reduced(d).empty());
  // root A, one B node under A = 1, leaves 0 2 3
  CHECK(add_node_count(d) == 5);
}

TEST_CASE("leaf counts include variables the diagram skips") {
  AddManager mgr(VarOrder({0, 1, 2}), {2, 3, 2});
  Add d = add_from_dense(mgr, DenseFactor::constant({0, 1, 2}, {2, 3, 2}, 0.5));
  CHECK(add_node_count(d) == 1);
  CHECK(counts_by_value(d) == std::map<double, std::uint64_t>{{0.5, 12}});
  CHECK(add_total(d) == doctest::Approx(6.0));
}

TEST_CASE("lossy projection averages over each leaf of the structure") {
  AddManager mgr(VarOrder({0, 1}), {2, 2});
  Add phi = add_from_dense(mgr, fixtures::f1());
  // structure: A = 0 -> 1, A = 1 -> 2, over scope {A, B}
  Add structure = add_from_dense(mgr, DenseFactor({0, 1}, {2, 2}, {1, 1, 2, 2}));
  Add r = add_lossy_project(phi, structure);
  CHECK(add_to_dense(r).values() == std::vector<double>{3, 3, 1, 1});
  CHECK(add_terminal_values(r) == std::vector<double>{1, 3});

  // zero leaves of the structure stay zero
  Add masked = add_from_dense(mgr, DenseFactor({0, 1}, {2, 2}, {1, 1, 0, 0}));
  CHECK(add_to_dense(add_lossy_project(phi, masked)).values() == std::vector<double>{3, 3, 0, 0});
}

TEST_CASE("diagram operations agree with dense ones") {
  Rng rng(29);
  AddManager mgr(VarOrder({2, 0, 3, 1}), {2, 3, 2, 2});
  for (int trial = 0; trial < 40; ++trial) {
    DenseFactor f = fixtures::random_factor(rng, {0, 1, 3}, {2, 3, 2}, 0.3);
    DenseFactor g = fixtures::random_factor(rng, {1, 2}, {3, 2}, 0.3);
    Add df = add_from_dense(mgr, f);
    Add dg = add_from_dense(mgr, g);
    CHECK(add_to_dense(df).values() == f.values());
    DenseFactor prod = factor_product(f, g);
    Add dp = add_apply_product(df, dg);
    CHECK(max_abs_diff(add_to_dense(dp), prod) < 1e-12);
    CHECK(add_check_reduced(dp).empty());
    CHECK(max_abs_diff(add_to_dense(add_sum_out(dp, {1})), factor_sum_out(prod, {1})) < 1e-12);
    CHECK(add_total(dp) == doctest::Approx(prod.sum()));
    if (prod.sum() > 0) CHECK(max_abs_diff(add_to_dense(add_normalize(dp)), normalize(prod)) < 1e-12);
    std::vector<int> x{1, 2, 0, 1};
    CHECK(add_evaluate(dp, x) == doctest::Approx(prod.at(x)));
  }
}

TEST_CASE("equal functions share one root") {
  AddManager mgr(VarOrder({0, 1}), {2, 2});
  Add a = add_from_dense(mgr, DenseFactor({0, 1}, {2, 2}, {2, 6, 2, 0}));
  Add b = add_apply_product(add_from_dense(mgr, fixtures::f_a()), add_from_dense(mgr, fixtures::g_ab()));
  CHECK(a.same_function(b));
}

TEST_CASE("diagram division") {
  AddManager mgr(VarOrder({0, 1}), {2, 2});
  Add h = add_from_dense(mgr, DenseFactor({0, 1}, {2, 2}, {2, 6, 2, 0}));
  Add f = add_from_dense(mgr, fixtures::f_a());
  CHECK(add_to_dense(add_apply_divide(h, f)).values() == std::vector<double>{1, 3, 2, 0});
  Add zero_at_one = add_from_dense(mgr, DenseFactor({0}, {2}, {1, 0}));
  CHECK_THROWS_AS(add_apply_divide(h, zero_at_one), DivisionSupportError);
}

TEST_CASE("support indicators") {
  AddManager mgr(VarOrder({0, 1}), {2, 2});
  TupleCodec codec({0, 1}, {2, 2});
  std::vector<int> t1{0, 1}, t2{1, 0};
  SupportRelation s({0, 1}, {2, 2}, {codec.encode(t1), codec.encode(t2)});
  CHECK(add_to_dense(add_from_support(mgr, s)).values() == std::vector<double>{0, 1, 1, 0});
}

TEST_CASE("diagram quantization merges close leaves") {
  AddManager mgr(VarOrder({0}), {3});
  Add d = add_from_dense(mgr, DenseFactor({0}, {3}, {0.10, 0.11, 0.50}));
  Add q = add_quantize(d, 0.05);
  DenseFactor out = add_to_dense(q);
  CHECK(out[0] == doctest::Approx(0.105));
  CHECK(out[1] == doctest::Approx(0.105));
  CHECK(out[2] == 0.50);
  CHECK(add_terminal_values(q).size() == 2);
  CHECK(add_quantize(d, 0.0).same_function(d));
}

TEST_CASE("node construction enforces order and reduction") {
  AddManager mgr(VarOrder({0, 1}), {2, 2});
  NodeId one = mgr.terminal(1.0);
  NodeId two = mgr.terminal(2.0);
  std::vector<NodeId> same{one, one};
  CHECK(mgr.node(1, same) == one);
  std::vector<NodeId> kids{one, two};
  NodeId b = mgr.node(1, kids);
  CHECK(mgr.node(1, kids) == b);
  std::vector<NodeId> bad{b, one};
  CHECK_THROWS_AS(mgr.node(1, bad), ContractError);
  CHECK_THROWS_AS(mgr.terminal(-1.0), ContractError);
  CHECK_THROWS_AS(VarOrder({0, 0}), ContractError);
}

TEST_CASE("min-fill ordering") {
  // chain A - B - C: every order has width 1
  GraphicalModel chain({2, 2, 2}, {DenseFactor::constant({0, 1}, {2, 2}, 1), DenseFactor::constant({1, 2}, {2, 2}, 1)});
  EliminationOrder o = min_fill_order(chain);
  CHECK(o.order.size() == 3);
  CHECK(o.induced_width == 1);
  CHECK(o.order.front() == 0);

  // 4-cycle: width 2
  GraphicalModel cycle({2, 2, 2, 2},
                       {DenseFactor::constant({0, 1}, {2, 2}, 1), DenseFactor::constant({1, 2}, {2, 2}, 1),
                        DenseFactor::constant({2, 3}, {2, 2}, 1), DenseFactor::constant({0, 3}, {2, 2}, 1)});
  CHECK(min_fill_order(cycle).induced_width == 2);
  CHECK(induced_width(cycle, {0, 2, 1, 3}) == 2);
  // eliminating the middle of the star first costs more
  GraphicalModel star({2, 2, 2, 2},
                      {DenseFactor::constant({0, 1}, {2, 2}, 1), DenseFactor::constant({0, 2}, {2, 2}, 1),
                       DenseFactor::constant({0, 3}, {2, 2}, 1)});
  CHECK(induced_width(star, {0, 1, 2, 3}) == 3);
  CHECK(min_fill_order(star).induced_width == 1);
}
