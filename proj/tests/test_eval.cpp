#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "smp/errors.hpp"
#include "smp/eval.hpp"

using namespace smp;

TEST_CASE("average KL") {
  std::vector<std::vector<double>> exact{{0.5, 0.5}, {0.25, 0.75}};
  CHECK(avg_kl(exact, exact) == 0.0);
  std::vector<std::vector<double>> approx{{0.75, 0.25}, {0.25, 0.75}};
  double kl0 = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  CHECK(avg_kl(approx, exact) == doctest::Approx(kl0 / 2));
  std::vector<std::vector<double>> hole{{1.0, 0.0}, {0.25, 0.75}};
  CHECK(std::isinf(avg_kl(hole, exact)));
  // zero exact mass contributes nothing
  CHECK(avg_kl(exact, hole) < INFINITY);
}

TEST_CASE("canonical estimand") {
  CHECK(canonical_estimand({{0.8, 0.2}, {0.4, 0.6}}) == doctest::Approx(0.6));
}

TEST_CASE("bias and variance") {
  std::vector<double> h{0.4, 0.6};
  BiasVariance bv = bias_variance(h, 0.5);
  CHECK(bv.mse == doctest::Approx(0.01));
  CHECK(bv.bias2 == doctest::Approx(0.0));
  CHECK(bv.variance == doctest::Approx(0.01));

  std::vector<double> shifted{0.7, 0.7, 0.7};
  bv = bias_variance(shifted, 0.5);
  CHECK(bv.bias2 == doctest::Approx(0.04));
  CHECK(bv.variance == doctest::Approx(0.0));
  std::vector<double> one{0.5};
  CHECK_THROWS_AS(bias_variance(one, 0.5), ContractError);
}

TEST_CASE("ising generator") {
  GraphicalModel m = generate_ising({3, 4, 0.5, 0.2, 1});
  CHECK(m.num_variables() == 12);
  // 12 unary, 3 * 3 horizontal, 2 * 4 vertical
  CHECK(m.num_factors() == 29);
  CHECK(m.factor(0).scope() == Scope{0});
  CHECK(m.factor(1).scope() == Scope{0, 1});
  CHECK(m.factor(2).scope() == Scope{0, 4});
  for (const auto& f : m.factors()) {
    for (double v : f.values()) {
      CHECK(v >= std::exp(-0.5));
      CHECK(v <= std::exp(0.5));
    }
  }
  GraphicalModel again = generate_ising({3, 4, 0.5, 0.2, 1});
  CHECK(again.factor(5).values() == m.factor(5).values());
}

TEST_CASE("deterministic generator is satisfiable with many zeros") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GraphicalModel m = generate_deterministic(12, 1.5, seed);
    CHECK(m.num_factors() == 18 + 12);
    CHECK(partition_bruteforce(m) > 0.0);
    std::size_t zeros = 0, total = 0;
    for (const auto& f : m.factors()) {
      for (double v : f.values()) {
        zeros += v == 0.0;
        ++total;
      }
    }
    CHECK(zeros > 0);
  }
}

TEST_CASE("random generator keeps the planted assignment") {
  RandomModelParams p;
  p.zero_probability = 0.9;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    p.seed = seed;
    CHECK(partition_bruteforce(generate_random_model(p)) > 0.0);
  }
}

TEST_CASE("one run against exact marginals") {
  GraphicalModel m = generate_ising({3, 3, 0.5, 0.2, 1});
  ExactResult exact = exact_marginals(m);
  RunParams p;
  p.repr = ReprKind::kDense;
  p.lossless = true;
  p.i_bound = 10;
  RunRecord r = run_point(m, exact, p, 1, "r0");
  CHECK_FALSE(r.failed);
  CHECK(r.avg_kl < 1e-12);
  CHECK(r.k == 0);
  CHECK(r.estimand == doctest::Approx(canonical_estimand(exact.marginals)));

  p.lossless = false;
  p.method = SamplerMethod::kGibbs;
  p.k = 200;
  RunRecord s = run_point(m, exact, p, 3, "r1");
  CHECK(s.seed == 3);
  CHECK(s.k == 200);
  CHECK(s.avg_kl >= 0.0);
}

TEST_CASE("library failures become failed records") {
  GraphicalModel m = fixtures::two_var_model();
  ExactResult exact = exact_marginals(m);
  RunParams p;
  p.method = SamplerMethod::kGibbs;  // refuses models with zeros
  p.k = 10;
  RunRecord r = run_point(m, exact, p, 1, "bad");
  CHECK(r.failed);
  CHECK(std::isinf(r.avg_kl));
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("sweeps are reproducible and summarized") {
  GraphicalModel m = generate_ising({3, 3, 0.5, 0.2, 1});
  ExactResult exact = exact_marginals(m);
  SweepSpec spec;
  spec.axis = SweepAxis::kK;
  spec.values = {16, 64};
  spec.repetitions = 3;
  spec.base.repr = ReprKind::kSparse;
  spec.base.i_bound = 2;
  spec.omit_timing = true;
  SweepResult a = sweep(m, exact, spec);
  REQUIRE(a.records.size() == 6);
  REQUIRE(a.points.size() == 2);
  CHECK(a.records[0].seed == a.records[3].seed);
  CHECK(a.records[1].seed == spec.base_seed + 1);
  CHECK(a.points[1].estimands.size() == 3);
  spec.jobs = 3;
  SweepResult b = sweep(m, exact, spec);
  CHECK(a.csv == b.csv);

  std::istringstream lines(a.csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "run_id,seed,repr,i_bound,k,epsilon,schedule,iterations,converged,avg_kl,wall_ms");
  int rows = 0, summaries = 0;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.rfind("mean:", 0) == 0 || line.rfind("sd:", 0) == 0) ++summaries;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 10);
  CHECK(summaries == 4);
}

TEST_CASE("time sweeps write an envelope") {
  GraphicalModel m = generate_ising({3, 3, 0.5, 0.2, 1});
  ExactResult exact = exact_marginals(m);
  SweepSpec spec;
  spec.axis = SweepAxis::kTime;
  spec.values = {1000};
  spec.repetitions = 2;
  spec.base.repr = ReprKind::kSparse;
  spec.grid_k = {16, 32};
  spec.grid_i_bound = {2};
  spec.omit_timing = true;
  SweepResult r = sweep(m, exact, spec);
  CHECK(r.records.size() == 4);
  CHECK(r.envelope_csv.rfind("time_limit_ms,repr,k,i_bound,mean_avg_kl,sd_avg_kl\n", 0) == 0);
}

TEST_CASE("sweep arguments are checked") {
  GraphicalModel m = fixtures::two_var_model();
  ExactResult exact = exact_marginals(m);
  SweepSpec spec;
  CHECK_THROWS_AS(sweep(m, exact, spec), ContractError);
  spec.values = {4, 2};
  CHECK_THROWS_AS(sweep(m, exact, spec), ContractError);
}
