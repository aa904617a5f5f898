#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "smp/errors.hpp"
#include "smp/quantize.hpp"
#include "smp/sparse_table.hpp"

using namespace smp;

namespace {

using Tuples = std::vector<std::vector<int>>;

SupportRelation relation(Scope scope, std::vector<int> cards, const Tuples& tuples) {
  TupleCodec codec(scope, cards);
  std::vector<TupleKey> keys;
  for (const auto& t : tuples) keys.push_back(codec.encode(t));
  return SupportRelation(std::move(scope), std::move(cards), std::move(keys));
}

}  // namespace

TEST_CASE("tuple keys match dense indices") {
  TupleCodec codec({0, 2, 5}, {2, 3, 2});
  CHECK(codec.space_size() == 12);
  std::vector<int> t{1, 2, 0};
  CHECK(codec.encode(t) == 10);
  std::vector<int> back(3);
  codec.decode(10, back);
  CHECK(back == t);
  std::vector<int> full{1, 9, 2, 9, 9, 0};
  CHECK(codec.encode_full(full) == 10);
}

TEST_CASE("support projection keeps distinct restrictions") {
  SupportRelation s = relation({0, 1, 2}, {2, 2, 2}, {{0, 1, 0}, {0, 1, 1}, {1, 0, 1}});
  SupportRelation p = s.project({0, 1});
  CHECK(p.tuples() == Tuples{{0, 1}, {1, 0}});
  CHECK(s.project({}).size() == 1);
  CHECK(s.merged(relation({0, 1, 2}, {2, 2, 2}, {{1, 1, 1}, {0, 1, 0}})).size() == 4);
  CHECK(SupportRelation::full({0, 1}, {2, 3}).size() == 6);
}

TEST_CASE("dense and sparse tables round trip") {
  SparseTable t = sparse_from_dense(fixtures::f1());
  CHECK(t.size() == 3);
  CHECK(t.get(3) == 0.0);
  CHECK(sparse_to_dense(t).values() == fixtures::f1().values());
  t.set(0, 0.0);
  CHECK(t.size() == 2);
}

TEST_CASE("sparse operations agree with dense ones") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    DenseFactor f = fixtures::random_factor(rng, {0, 1, 3}, {2, 3, 2}, 0.4);
    DenseFactor g = fixtures::random_factor(rng, {1, 2, 3}, {3, 2, 2}, 0.4);
    SparseTable sf = sparse_from_dense(f);
    SparseTable sg = sparse_from_dense(g);
    DenseFactor prod = factor_product(f, g);
    CHECK(max_abs_diff(sparse_to_dense(sparse_product(sf, sg)), prod) < 1e-12);
    CHECK(max_abs_diff(sparse_to_dense(sparse_sum_out(sf, {1, 3})), factor_sum_out(f, {1, 3})) < 1e-12);
    if (prod.sum() > 0) {
      CHECK(max_abs_diff(sparse_to_dense(sparse_normalize(sparse_product(sf, sg))), normalize(prod)) < 1e-12);
    }
  }
}

TEST_CASE("sparse product stores only positive entries") {
  SparseTable a = sparse_from_dense(fixtures::f_a());
  SparseTable b = sparse_from_dense(fixtures::g_ab());
  SparseTable p = sparse_product(a, b);
  CHECK(p.size() == 3);
  CHECK(sparse_to_dense(p).values() == std::vector<double>{2, 6, 2, 0});
}

TEST_CASE("sparse division needs the divisor's support") {
  SparseTable h = sparse_from_dense(DenseFactor({0, 1}, {2, 2}, {2, 6, 2, 0}));
  SparseTable f = sparse_from_dense(fixtures::f_a());
  CHECK(sparse_to_dense(sparse_divide(h, f)).values() == std::vector<double>{1, 3, 2, 0});
  SparseTable partial = sparse_from_dense(DenseFactor({0}, {2}, {1, 0}));
  CHECK_THROWS_AS(sparse_divide(h, partial), DivisionSupportError);
}

TEST_CASE("lossy projection keeps entries inside the support") {
  SparseTable phi = sparse_from_dense(fixtures::f1());
  SupportRelation s = relation({0, 1}, {2, 2}, {{0, 1}, {1, 1}});
  SparseTable r = sparse_lossy_project(phi, s);
  CHECK(sparse_to_dense(r).values() == std::vector<double>{0, 3, 0, 0});
}

TEST_CASE("the chain message normalizes to the marginal of B") {
  SparseTable prod = sparse_product(sparse_from_dense(fixtures::f_a()), sparse_from_dense(fixtures::g_ab()));
  DenseFactor msg = sparse_to_dense(sparse_normalize(sparse_sum_out(prod, {0})));
  CHECK(msg[0] == doctest::Approx(0.4));
  CHECK(msg[1] == doctest::Approx(0.6));
}

TEST_CASE("quantization groups close values") {
  std::vector<double> v{0.10, 0.11, 0.50};
  Quantizer q(v, 0.05);
  CHECK(q.bin_count() == 2);
  CHECK(q(0.10) == doctest::Approx(0.105));
  CHECK(q(0.11) == doctest::Approx(0.105));
  CHECK(q(0.50) == 0.50);
  CHECK(q(0.0) == 0.0);

  std::vector<double> w{0.10, 0.11, 0.50};
  quantize_in_place(w, 0.0);
  CHECK(w == std::vector<double>{0.10, 0.11, 0.50});
}

TEST_CASE("quantization bounds the per-bin spread and never grows the support") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(30);
    for (double& x : v) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    double eps = rng.uniform(0.0, 0.2);
    Quantizer q(v, eps);
    for (const auto& bin : q.bins()) CHECK(bin.back() - bin.front() <= eps);
    std::vector<double> out = v;
    quantize_in_place(out, eps);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK((v[i] == 0.0) == (out[i] == 0.0));
      CHECK(std::abs(out[i] - v[i]) <= eps);
    }
  }
}

TEST_CASE("quantization rejects a negative epsilon") {
  std::vector<double> v{0.1};
  CHECK_THROWS_AS(Quantizer(v, -1.0), ContractError);
}
