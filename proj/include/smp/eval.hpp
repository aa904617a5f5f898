#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smp/engine.hpp"
#include "smp/exact.hpp"
#include "smp/model.hpp"
#include "smp/sampler.hpp"

namespace smp {

// Mean over variables of KL(exact || approx); +infinity if any term is.
double avg_kl(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& exact);

// Mean over variables of P(X = 0).
double canonical_estimand(const std::vector<std::vector<double>>& marginals);

struct BiasVariance {
  double mse = 0.0;
  double bias2 = 0.0;
  double variance = 0.0;
};

// Estimates h of one parameter point against the true value f. Needs >= 2.
BiasVariance bias_variance(std::span<const double> h, double f);

/// Knobs of one inference run.
struct RunParams {
  ReprKind repr = ReprKind::kAdd;
  int i_bound = 6;
  bool lossless = false;  // no sampling: full supports
  std::size_t k = 1024;
  double epsilon = 0.0;
  Schedule schedule = Schedule::kSumProduct;
  SamplerMethod method = SamplerMethod::kGibbs;
  int burn_in = 100;
  int thinning = 2;
  bool augment_support = true;
  int max_iterations = 100;
  double tolerance = 1e-6;
  double damping = 0.0;
  double time_limit_ms = 30000.0;
  std::size_t memory_limit_bytes = std::size_t{256} << 20;
};

EngineConfig engine_config(const RunParams& params);
std::optional<SamplerConfig> sampler_config(const RunParams& params, std::uint64_t seed);

struct RunRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  ReprKind repr = ReprKind::kAdd;
  int i_bound = 0;
  std::size_t k = 0;  // 0 for lossless runs
  double epsilon = 0.0;
  Schedule schedule = Schedule::kSumProduct;
  int iterations = 0;
  bool converged = false;
  double avg_kl = 0.0;
  double wall_ms = 0.0;
  // Not part of the CSV.
  double estimand = 0.0;
  double time_limit_ms = 0.0;
  bool failed = false;
  std::string note;
};

// One run against known exact marginals. Library errors become a failed
// record with avg_kl = +infinity.
RunRecord run_point(const GraphicalModel& model, const ExactResult& exact, const RunParams& params,
                    std::uint64_t seed, std::string run_id);

enum class SweepAxis { kK, kEpsilon, kIBound, kTime };

const char* to_string(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kK;
  std::vector<double> values;  // sorted ascending; time values are limits in ms
  int repetitions = 10;
  RunParams base;
  std::uint64_t base_seed = 1;  // repetition r uses base_seed + r at every point
  int jobs = 1;
  bool omit_timing = false;  // write wall_ms as 0 so output is reproducible
  // Time axis: every (k, i-bound) pair is run at every time limit.
  std::vector<std::size_t> grid_k = {256, 1024, 4096};
  std::vector<int> grid_i_bound = {2, 4, 6};
};

struct PointSummary {
  double value = 0.0;  // axis value
  RunParams params;
  double mean_avg_kl = 0.0;
  double sd_avg_kl = 0.0;
  double mean_iterations = 0.0;
  double converged_fraction = 0.0;
  double mean_wall_ms = 0.0;
  std::vector<double> estimands{};
};

struct SweepResult {
  std::vector<RunRecord> records;
  std::vector<PointSummary> points;
  std::string csv;
  std::string envelope_csv;  // time axis only
};

SweepResult sweep(const GraphicalModel& model, const ExactResult& exact, const SweepSpec& spec);

std::string csv_header();
std::string format_csv_row(const RunRecord& record);

struct IsingParams {
  int rows = 10;
  int cols = 10;
  double coupling = 0.5;  // |J| <= coupling
  double field = 0.2;     // |h| <= field
  std::uint64_t seed = 1;
};

// Binary grid with unary exp(+-h) and pairwise exp(+-J) potentials; factors
// listed per cell as unary, right neighbor, lower neighbor.
GraphicalModel generate_ising(const IsingParams& params);

// n binary variables with a planted assignment: round(density * n) hard
// 3-variable constraints, each zeroing every other tuple with probability 1/2,
// plus one positive unary factor per variable.
GraphicalModel generate_deterministic(int n, double clause_density, std::uint64_t seed);

struct RandomModelParams {
  int variables = 8;
  int factors = 10;
  int max_arity = 3;
  int max_cardinality = 2;
  double zero_probability = 0.0;  // per entry, never on the planted tuple
  std::uint64_t seed = 1;
};

// Random factors whose scopes are random subsets; always satisfiable.
GraphicalModel generate_random_model(const RandomModelParams& params);

}  // namespace smp
