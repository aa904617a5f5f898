#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smp/model.hpp"
#include "smp/sparse_table.hpp"

namespace smp {

enum class SamplerMethod { kGibbs, kImportance };

const char* to_string(SamplerMethod m);

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::kGibbs;
  std::size_t k = 1024;
  std::uint64_t seed = 1;
  int burn_in = 100;   // full sweeps discarded (Gibbs)
  int thinning = 2;    // keep every thinning-th sweep (Gibbs)
};

struct SampleSet {
  std::vector<Assignment> samples;
  SamplerMethod method = SamplerMethod::kGibbs;
  std::uint64_t seed = 0;
  int burn_in = 0;
  int thinning = 1;
  // Accepted draws over attempted draws; 1 for Gibbs.
  double acceptance_rate = 1.0;
};

// Systematic-scan Gibbs from a uniform random start. Throws DeterminismError
// when any factor has a zero entry or a conditional has no positive value.
SampleSet gibbs_sample(const GraphicalModel& model, const SamplerConfig& config);

// Sequential proposal along the reversed min-fill order: each variable is drawn
// from the product of the factors it completes. A draw with no positive
// option restarts the sample. Throws ProposalFailureError when fewer than
// 1e-4 of the attempts in a window succeed.
SampleSet importance_sample(const GraphicalModel& model, const SamplerConfig& config);

SampleSet generate_samples(const GraphicalModel& model, const SamplerConfig& config);

// Distinct restrictions of the samples to `scope`.
SupportRelation project_samples(const SampleSet& samples, const Scope& scope, const std::vector<int>& model_cards);

// Adds, for every factor in `factor_ids`, each nonzero tuple extended to the
// support's scope by every completion seen in the samples on the remaining
// variables (or the all-zero completion when there are none).
SupportRelation augment_support(const SupportRelation& support, const GraphicalModel& model,
                                const std::vector<int>& factor_ids, const SampleSet& samples);

// One assignment per line, values separated by spaces.
std::string dump_samples(const SampleSet& samples);

}  // namespace smp
