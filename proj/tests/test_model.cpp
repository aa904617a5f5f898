#include <cmath>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "smp/errors.hpp"
#include "smp/model.hpp"
#include "smp/uai.hpp"

using namespace smp;
using fixtures::f1;
using fixtures::f_a;
using fixtures::g_ab;

TEST_CASE("product of overlapping factors") {
  DenseFactor h = factor_product(f_a(), g_ab());
  CHECK(h.scope() == Scope{0, 1});
  CHECK(h.values() == std::vector<double>{2, 6, 2, 0});
}

TEST_CASE("product with a constant-one factor is the identity") {
  DenseFactor one = DenseFactor::constant({0, 1}, {2, 2}, 1.0);
  CHECK(factor_product(f1(), one).values() == f1().values());
}

TEST_CASE("scalar product") {
  DenseFactor p = factor_product(DenseFactor::scalar(2), DenseFactor::scalar(5));
  CHECK(p.is_scalar());
  CHECK(p[0] == 10);
}

TEST_CASE("disjoint product is an outer product") {
  DenseFactor a({0}, {2}, {1, 2});
  DenseFactor b({2}, {3}, {1, 10, 100});
  DenseFactor p = factor_product(b, a);
  CHECK(p.scope() == Scope{0, 2});
  CHECK(p.values() == std::vector<double>{1, 10, 100, 2, 20, 200});
}

TEST_CASE("sum out") {
  CHECK(factor_sum_out(f1(), {}).values() == f1().values());
  CHECK(factor_sum_out(f1(), {1}).values() == std::vector<double>{6, 2});
  DenseFactor all = factor_sum_out(factor_product(f_a(), g_ab()), {0, 1});
  CHECK(all.is_scalar());
  CHECK(all[0] == 10);
  CHECK_THROWS_AS(factor_sum_out(f1(), {2}), ContractError);
}

TEST_CASE("sum out distributes over a product when the variable is private") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    DenseFactor f = fixtures::random_factor(rng, {0, 1}, {2, 3});
    DenseFactor g = fixtures::random_factor(rng, {1, 2}, {3, 2});
    DenseFactor lhs = factor_sum_out(factor_product(f, g), {2});
    DenseFactor rhs = factor_product(f, factor_sum_out(g, {2}));
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("divide") {
  DenseFactor h({0, 1}, {2, 2}, {2, 6, 2, 0});
  CHECK(factor_divide(h, f_a()).values() == std::vector<double>{1, 3, 2, 0});
  CHECK(factor_divide(f1(), f1()).values() == std::vector<double>{1, 1, 1, 0});
  CHECK_THROWS_AS(factor_divide(DenseFactor({0}, {2}, {1, 0}), DenseFactor({0}, {2}, {0, 1})), DivisionSupportError);
}

TEST_CASE("normalize") {
  CHECK(normalize(DenseFactor({0}, {2}, {2, 2})).values() == std::vector<double>{0.5, 0.5});
  CHECK(normalize(DenseFactor({0}, {2}, {6, 2})).values() == std::vector<double>{0.75, 0.25});
  CHECK_THROWS_AS(normalize(DenseFactor({0}, {2}, {0, 0})), NormalizationError);
  DenseFactor once = normalize(f1());
  CHECK(max_abs_diff(normalize(once), once) == 0.0);
}

TEST_CASE("kl divergence") {
  DenseFactor p({0}, {2}, {1, 1});
  DenseFactor q({0}, {2}, {3, 1});
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(p, q) == doctest::Approx(0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25)));
  CHECK(std::isinf(kl_divergence(DenseFactor({0}, {2}, {1, 0}), DenseFactor({0}, {2}, {0, 1}))));
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    DenseFactor a = fixtures::random_factor(rng, {0, 1}, {2, 2});
    DenseFactor b = fixtures::random_factor(rng, {0, 1}, {2, 2});
    CHECK(kl_divergence(a, b) >= 0.0);
  }
}

TEST_CASE("factor construction rejects bad tables") {
  CHECK_THROWS_AS(DenseFactor({0}, {2}, {1, 2, 3}), ContractError);
  CHECK_THROWS_AS(DenseFactor({1, 0}, {2, 2}, {1, 2, 3, 4}), ContractError);
  CHECK_THROWS_AS(DenseFactor({0}, {2}, {1, -1}), ContractError);
  CHECK_THROWS_AS(DenseFactor({0}, {2}, {1, std::numeric_limits<double>::infinity()}), ContractError);
}

TEST_CASE("tables in file order are permuted to sorted scope order") {
  // scope (B, A) in file order with A fastest: B0A0 B0A1 B0A2 B1A0 B1A1 B1A2
  DenseFactor f = DenseFactor::from_table({1, 0}, {2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(f.scope() == Scope{0, 1});
  CHECK(f.cards() == std::vector<int>{3, 2});
  std::vector<int> x{2, 1};  // A = 2, B = 1
  CHECK(f.at(x) == 6);
  x = {1, 0};
  CHECK(f.at(x) == 2);
}

TEST_CASE("partition function by enumeration") {
  GraphicalModel m = fixtures::two_var_model();
  CHECK(partition_bruteforce(m) == 10);
  std::vector<int> x{1, 1};
  CHECK(evaluate_unnormalized(m, x) == 0);
  GraphicalModel single({2}, {DenseFactor({0}, {2}, {0.4, 0.6})});
  CHECK(partition_bruteforce(single) == doctest::Approx(1.0));
  GraphicalModel wide(std::vector<int>(30, 2), {});
  CHECK_THROWS_AS(partition_bruteforce(wide), CapError);
}

TEST_CASE("assignments are enumerated lexicographically") {
  std::vector<Assignment> seen;
  for_each_assignment({2, 3}, [&](const Assignment& x) { seen.push_back(x); });
  REQUIRE(seen.size() == 6);
  CHECK(seen[1] == Assignment{0, 1});
  CHECK(seen[3] == Assignment{1, 0});
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(GraphicalModel({}, {}), ContractError);
  CHECK_THROWS_AS(GraphicalModel({1}, {}), ContractError);
  CHECK_THROWS_AS(GraphicalModel({2}, {DenseFactor({1}, {2}, {1, 1})}), ContractError);
  CHECK_THROWS_AS(GraphicalModel({2, 3}, {DenseFactor({1}, {2}, {1, 1})}), ContractError);
}

TEST_CASE("parse a unary model") {
  GraphicalModel m = parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n0.4 0.6\n");
  REQUIRE(m.num_variables() == 1);
  REQUIRE(m.num_factors() == 1);
  CHECK(m.factor(0).values() == std::vector<double>{0.4, 0.6});
}

TEST_CASE("parse a model without factors") {
  GraphicalModel m = parse_uai("MARKOV\n3\n2 2 3\n0\n");
  CHECK(m.num_variables() == 3);
  CHECK(m.num_factors() == 0);
}

TEST_CASE("parse errors name the offending line") {
  auto line_of = [](const char* text) {
    try {
      parse_uai(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("BAYES\n1\n2\n0\n") == 1);
  CHECK(line_of("MARKOV\n1\n2\n1\n1 0\n3\n0.1 0.2 0.3\n") == 6);
  CHECK(line_of("MARKOV\n1\n2\n1\n1 4\n2\n0.1 0.2\n") == 5);
  CHECK(line_of("MARKOV\n2\n2 1\n0\n") == 3);
}

TEST_CASE("write then parse reproduces the model") {
  Rng rng(5);
  GraphicalModel m({2, 3, 2},
                   {fixtures::random_factor(rng, {0, 2}, {2, 2}), fixtures::random_factor(rng, {1}, {3}),
                    fixtures::random_factor(rng, {0, 1, 2}, {2, 3, 2})});
  GraphicalModel back = parse_uai(write_uai(m));
  REQUIRE(back.num_factors() == m.num_factors());
  for (std::size_t i = 0; i < m.num_factors(); ++i) {
    CHECK(back.factor(i).scope() == m.factor(i).scope());
    CHECK(back.factor(i).values() == m.factor(i).values());
  }
}

TEST_CASE("evidence zeroes inconsistent entries") {
  Evidence ev = parse_evidence("1 0 0");
  REQUIRE(ev.size() == 1);
  GraphicalModel m = absorb_evidence(fixtures::two_var_model(), ev);
  CHECK(partition_bruteforce(m) == 8);  // 2 * (1 + 3)
  // a variable no factor mentions gets an indicator
  GraphicalModel lone = absorb_evidence(GraphicalModel({2, 2}, {f_a()}), parse_evidence("1 1 1"));
  CHECK(partition_bruteforce(lone) == 3);
  CHECK_THROWS_AS(absorb_evidence(fixtures::two_var_model(), parse_evidence("1 0 5")), ContractError);
}
