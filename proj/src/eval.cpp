#include "smp/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "smp/errors.hpp"
#include "smp/rng.hpp"

namespace smp {

double avg_kl(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& exact) {
  if (approx.size() != exact.size()) throw ContractError("avg_kl: variable sets differ");
  if (exact.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t v = 0; v < exact.size(); ++v) {
    const double kl = kl_divergence(exact[v], approx[v]);
    if (std::isinf(kl)) return std::numeric_limits<double>::infinity();
    total += kl;
  }
  return total / static_cast<double>(exact.size());
}

double canonical_estimand(const std::vector<std::vector<double>>& marginals) {
  if (marginals.empty()) return 0.0;
  double total = 0.0;
  for (const auto& m : marginals) total += m.at(0);
  return total / static_cast<double>(marginals.size());
}

BiasVariance bias_variance(std::span<const double> h, double f) {
  if (h.size() < 2) throw ContractError("bias_variance needs at least two estimates");
  const double n = static_cast<double>(h.size());
  const double mean = std::accumulate(h.begin(), h.end(), 0.0) / n;
  BiasVariance out;
  for (double x : h) {
    out.mse += (x - f) * (x - f);
    out.variance += (x - mean) * (x - mean);
  }
  out.mse /= n;
  out.variance /= n;
  out.bias2 = (mean - f) * (mean - f);
  return out;
}

EngineConfig engine_config(const RunParams& params) {
  EngineConfig c;
  c.epsilon = params.epsilon;
  c.schedule = params.schedule;
  c.max_iterations = params.max_iterations;
  c.tolerance = params.tolerance;
  c.damping = params.damping;
  c.augment_support = params.augment_support;
  c.time_limit_ms = params.time_limit_ms;
  c.memory_limit_bytes = params.memory_limit_bytes;
  return c;
}

std::optional<SamplerConfig> sampler_config(const RunParams& params, std::uint64_t seed) {
  if (params.lossless) return std::nullopt;
  SamplerConfig s;
  s.method = params.method;
  s.k = params.k;
  s.seed = seed;
  s.burn_in = params.burn_in;
  s.thinning = params.thinning;
  return s;
}

RunRecord run_point(const GraphicalModel& model, const ExactResult& exact, const RunParams& params,
                    std::uint64_t seed, std::string run_id) {
  RunRecord rec;
  rec.run_id = std::move(run_id);
  rec.seed = seed;
  rec.repr = params.repr;
  rec.i_bound = params.i_bound;
  rec.k = params.lossless ? 0 : params.k;
  rec.epsilon = params.epsilon;
  rec.schedule = params.schedule;
  rec.time_limit_ms = params.time_limit_ms;
  try {
    JoinGraphParams jg;
    jg.i_bound = params.i_bound;
    RunResult r = run_algorithm_1(model, jg, sampler_config(params, seed), engine_config(params), params.repr);
    rec.iterations = r.propagation.iterations;
    rec.converged = r.propagation.converged;
    rec.avg_kl = avg_kl(r.marginals.p, exact.marginals);
    rec.estimand = canonical_estimand(r.marginals.p);
    rec.wall_ms = r.wall_ms;
    if (!r.warnings.empty()) rec.note = r.warnings.front();
  } catch (const Error& e) {
    rec.failed = true;
    rec.avg_kl = std::numeric_limits<double>::infinity();
    rec.estimand = std::numeric_limits<double>::quiet_NaN();
    rec.note = e.what();
  }
  return rec;
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kK:
      return "k";
    case SweepAxis::kEpsilon:
      return "epsilon";
    case SweepAxis::kIBound:
      return "ibound";
    case SweepAxis::kTime:
      return "time";
  }
  return "?";
}

namespace {

std::string number(double x, const char* fmt = "%.10g") {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

std::string csv_row(const std::string& id, std::uint64_t seed, const RunParams& p, std::size_t k,
                    const std::string& iterations, const std::string& converged, double kl, const std::string& wall) {
  std::ostringstream out;
  out << id << ',' << seed << ',' << to_string(p.repr) << ',' << p.i_bound << ',' << k << ',' << number(p.epsilon)
      << ',' << to_string(p.schedule) << ',' << iterations << ',' << converged << ',' << number(kl) << ',' << wall
      << '\n';
  return out.str();
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample standard deviation; +infinity propagates.
double sd_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  if (std::isinf(m)) return std::numeric_limits<double>::infinity();
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string csv_header() { return "run_id,seed,repr,i_bound,k,epsilon,schedule,iterations,converged,avg_kl,wall_ms\n"; }

std::string format_csv_row(const RunRecord& r) {
  RunParams p;
  p.repr = r.repr;
  p.i_bound = r.i_bound;
  p.epsilon = r.epsilon;
  p.schedule = r.schedule;
  return csv_row(r.run_id, r.seed, p, r.k, std::to_string(r.iterations), r.converged ? "1" : "0", r.avg_kl,
                 std::to_string(std::llround(r.wall_ms)));
}

SweepResult sweep(const GraphicalModel& model, const ExactResult& exact, const SweepSpec& spec) {
  if (spec.values.empty()) throw ContractError("sweep needs at least one axis value");
  if (!std::is_sorted(spec.values.begin(), spec.values.end())) throw ContractError("sweep axis values must be sorted");
  if (spec.repetitions < 1) throw ContractError("sweep needs at least one repetition");

  SweepResult out;
  for (double value : spec.values) {
    RunParams p = spec.base;
    switch (spec.axis) {
      case SweepAxis::kK:
        p.k = static_cast<std::size_t>(value);
        p.lossless = false;
        break;
      case SweepAxis::kEpsilon:
        p.epsilon = value;
        break;
      case SweepAxis::kIBound:
        p.i_bound = static_cast<int>(value);
        break;
      case SweepAxis::kTime:
        p.time_limit_ms = value;
        for (std::size_t k : spec.grid_k) {
          for (int ib : spec.grid_i_bound) {
            RunParams q = p;
            q.k = k;
            q.i_bound = ib;
            q.lossless = false;
            out.points.push_back({value, q});
          }
        }
        continue;
    }
    out.points.push_back({value, p});
  }

  const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
  const std::size_t tasks = out.points.size() * reps;
  out.records.resize(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      const std::size_t point = t / reps;
      const std::size_t rep = t % reps;
      RunRecord rec = run_point(model, exact, out.points[point].params, spec.base_seed + rep,
                                "p" + std::to_string(point) + "r" + std::to_string(rep));
      if (spec.omit_timing) rec.wall_ms = 0.0;
      out.records[t] = std::move(rec);
    }
  };
  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ostringstream csv;
  csv << csv_header();
  for (const auto& r : out.records) csv << format_csv_row(r);
  for (std::size_t point = 0; point < out.points.size(); ++point) {
    auto& s = out.points[point];
    std::vector<double> kls, iters, walls;
    double conv = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& r = out.records[point * reps + rep];
      kls.push_back(r.avg_kl);
      iters.push_back(r.iterations);
      walls.push_back(r.wall_ms);
      conv += r.converged ? 1.0 : 0.0;
      s.estimands.push_back(r.estimand);
    }
    s.mean_avg_kl = mean_of(kls);
    s.sd_avg_kl = sd_of(kls);
    s.mean_iterations = mean_of(iters);
    s.converged_fraction = conv / static_cast<double>(reps);
    s.mean_wall_ms = mean_of(walls);
    const std::size_t k = s.params.lossless ? 0 : s.params.k;
    const std::string id = "p" + std::to_string(point);
    csv << csv_row("mean:" + id, spec.base_seed, s.params, k, number(s.mean_iterations, "%.4g"),
                   number(s.converged_fraction, "%.4g"), s.mean_avg_kl, number(s.mean_wall_ms, "%.0f"));
    csv << csv_row("sd:" + id, spec.base_seed, s.params, k, number(sd_of(iters), "%.4g"), "",
                   s.sd_avg_kl, number(sd_of(walls), "%.0f"));
  }
  out.csv = csv.str();

  if (spec.axis == SweepAxis::kTime) {
    std::ostringstream env;
    env << "time_limit_ms,repr,k,i_bound,mean_avg_kl,sd_avg_kl\n";
    for (double value : spec.values) {
      const PointSummary* best = nullptr;
      for (const auto& s : out.points) {
        if (s.value != value) continue;
        if (!best || s.mean_avg_kl < best->mean_avg_kl) best = &s;
      }
      env << number(value) << ',' << to_string(best->params.repr) << ',' << best->params.k << ','
          << best->params.i_bound << ',' << number(best->mean_avg_kl) << ',' << number(best->sd_avg_kl) << '\n';
    }
    out.envelope_csv = env.str();
  }
  return out;
}

GraphicalModel generate_ising(const IsingParams& params) {
  if (params.rows < 1 || params.cols < 1) throw ContractError("grid dimensions must be positive");
  Rng rng(params.seed);
  const int n = params.rows * params.cols;
  std::vector<DenseFactor> factors;
  auto pairwise = [&](int a, int b) {
    const double j = rng.uniform(-params.coupling, params.coupling);
    factors.emplace_back(Scope{a, b}, std::vector<int>{2, 2},
                         std::vector<double>{std::exp(j), std::exp(-j), std::exp(-j), std::exp(j)});
  };
  for (int r = 0; r < params.rows; ++r) {
    for (int c = 0; c < params.cols; ++c) {
      const int v = r * params.cols + c;
      const double h = rng.uniform(-params.field, params.field);
      factors.emplace_back(Scope{v}, std::vector<int>{2}, std::vector<double>{std::exp(h), std::exp(-h)});
      if (c + 1 < params.cols) pairwise(v, v + 1);
      if (r + 1 < params.rows) pairwise(v, v + params.cols);
    }
  }
  return GraphicalModel(std::vector<int>(static_cast<std::size_t>(n), 2), std::move(factors));
}

namespace {

// `count` distinct variables out of n, sorted.
Scope random_scope(Rng& rng, int n, int count) {
  std::vector<VarId> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  Scope s(pool.begin(), pool.begin() + count);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

GraphicalModel generate_deterministic(int n, double clause_density, std::uint64_t seed) {
  if (n < 3) throw ContractError("deterministic generator needs at least 3 variables");
  Rng rng(seed);
  Assignment planted(static_cast<std::size_t>(n));
  for (auto& x : planted) x = static_cast<int>(rng.below(2));
  std::vector<DenseFactor> factors;
  const int hard = std::max(1, static_cast<int>(std::lround(clause_density * n)));
  for (int c = 0; c < hard; ++c) {
    Scope s = random_scope(rng, n, 3);
    DenseFactor f = DenseFactor::constant(s, {2, 2, 2}, 1.0);
    const std::size_t keep = f.index_of(planted);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i != keep && rng.below(2) == 0) f.mutable_values()[i] = 0.0;
    }
    factors.push_back(std::move(f));
  }
  for (int v = 0; v < n; ++v) {
    factors.emplace_back(Scope{v}, std::vector<int>{2}, std::vector<double>{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)});
  }
  return GraphicalModel(std::vector<int>(static_cast<std::size_t>(n), 2), std::move(factors));
}

GraphicalModel generate_random_model(const RandomModelParams& params) {
  if (params.variables < 1 || params.max_arity < 1 || params.max_cardinality < 2) {
    throw ContractError("invalid random model parameters");
  }
  Rng rng(params.seed);
  std::vector<int> cards(static_cast<std::size_t>(params.variables));
  for (auto& c : cards) c = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.max_cardinality - 1)));
  Assignment planted(cards.size());
  for (std::size_t v = 0; v < cards.size(); ++v) planted[v] = static_cast<int>(rng.below(static_cast<std::uint64_t>(cards[v])));
  std::vector<DenseFactor> factors;
  const int max_arity = std::min(params.max_arity, params.variables);
  for (int f = 0; f < params.factors; ++f) {
    const int arity = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_arity)));
    Scope s = random_scope(rng, params.variables, arity);
    std::vector<int> sc;
    for (VarId v : s) sc.push_back(cards[static_cast<std::size_t>(v)]);
    DenseFactor t = DenseFactor::constant(s, sc, 1.0);
    const std::size_t keep = t.index_of(planted);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const bool zero = i != keep && rng.uniform() < params.zero_probability;
      t.mutable_values()[i] = zero ? 0.0 : rng.uniform(0.1, 2.0);
    }
    factors.push_back(std::move(t));
  }
  return GraphicalModel(std::move(cards), std::move(factors));
}

}  // namespace smp
