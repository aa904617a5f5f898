#include "smp/sampler.hpp"

#include <algorithm>
#include <sstream>

#include "smp/errors.hpp"
#include "smp/ordering.hpp"
#include "smp/rng.hpp"

namespace smp {

namespace {

constexpr std::uint64_t kProposalWindow = 100000;
constexpr double kMinAcceptance = 1e-4;

std::vector<std::vector<int>> factors_by_variable(const GraphicalModel& model) {
  std::vector<std::vector<int>> out(model.num_variables());
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    for (VarId v : model.factor(f).scope()) out[static_cast<std::size_t>(v)].push_back(static_cast<int>(f));
  }
  return out;
}

void check_config(const SamplerConfig& config) {
  if (config.k < 1) throw ContractError("sample count must be at least 1");
  if (config.burn_in < 0 || config.thinning < 1) throw ContractError("invalid burn-in or thinning");
}

}  // namespace

const char* to_string(SamplerMethod m) { return m == SamplerMethod::kGibbs ? "gibbs" : "importance"; }

SampleSet gibbs_sample(const GraphicalModel& model, const SamplerConfig& config) {
  check_config(config);
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    const auto& vals = model.factor(f).values();
    if (std::any_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; })) {
      throw DeterminismError("factor " + std::to_string(f) +
                             " has zero entries; Gibbs sampling needs a positive model, use importance sampling");
    }
  }
  const auto touching = factors_by_variable(model);
  Rng rng(config.seed);
  const std::size_t n = model.num_variables();
  Assignment x(n);
  for (std::size_t v = 0; v < n; ++v) x[v] = static_cast<int>(rng.below(static_cast<std::uint64_t>(model.cardinality(static_cast<VarId>(v)))));

  SampleSet out;
  out.method = SamplerMethod::kGibbs;
  out.seed = config.seed;
  out.burn_in = config.burn_in;
  out.thinning = config.thinning;
  out.samples.reserve(config.k);

  std::vector<double> weights;
  auto sweep = [&] {
    for (std::size_t v = 0; v < n; ++v) {
      const int card = model.cardinality(static_cast<VarId>(v));
      weights.assign(static_cast<std::size_t>(card), 1.0);
      for (int val = 0; val < card; ++val) {
        x[v] = val;
        for (int f : touching[v]) weights[static_cast<std::size_t>(val)] *= model.factor(static_cast<std::size_t>(f)).at(x);
      }
      std::size_t pick = rng.categorical(weights);
      if (pick == weights.size()) {
        throw DeterminismError("conditional of variable " + std::to_string(v) +
                               " is zero everywhere; use importance sampling");
      }
      x[v] = static_cast<int>(pick);
    }
  };
  for (int s = 0; s < config.burn_in; ++s) sweep();
  while (out.samples.size() < config.k) {
    for (int t = 0; t < config.thinning; ++t) sweep();
    out.samples.push_back(x);
  }
  return out;
}

SampleSet importance_sample(const GraphicalModel& model, const SamplerConfig& config) {
  check_config(config);
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    if (model.factor(f).is_scalar() && !(model.factor(f)[0] > 0.0)) {
      throw ProposalFailureError("a constant factor is zero; the model has no positive assignment");
    }
  }
  std::vector<VarId> order = min_fill_order(model).order;
  std::reverse(order.begin(), order.end());
  std::vector<int> pos(model.num_variables());
  for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

  // Factors whose last variable in sampling order is v.
  std::vector<std::vector<int>> completes(model.num_variables());
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    const Scope& s = model.factor(f).scope();
    if (s.empty()) continue;
    VarId last = *std::max_element(s.begin(), s.end(), [&](VarId a, VarId b) {
      return pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)];
    });
    completes[static_cast<std::size_t>(last)].push_back(static_cast<int>(f));
  }

  Rng rng(config.seed);
  SampleSet out;
  out.method = SamplerMethod::kImportance;
  out.seed = config.seed;
  out.burn_in = 0;
  out.thinning = 1;
  out.samples.reserve(config.k);

  Assignment x(model.num_variables(), 0);
  std::vector<double> weights;
  std::uint64_t attempts = 0;
  std::uint64_t window_attempts = 0;
  std::uint64_t window_accepted = 0;
  while (out.samples.size() < config.k) {
    ++attempts;
    ++window_attempts;
    bool ok = true;
    for (VarId v : order) {
      const int card = model.cardinality(v);
      weights.assign(static_cast<std::size_t>(card), 1.0);
      for (int val = 0; val < card; ++val) {
        x[static_cast<std::size_t>(v)] = val;
        for (int f : completes[static_cast<std::size_t>(v)]) {
          weights[static_cast<std::size_t>(val)] *= model.factor(static_cast<std::size_t>(f)).at(x);
        }
      }
      std::size_t pick = rng.categorical(weights);
      if (pick == weights.size()) {
        ok = false;
        break;
      }
      x[static_cast<std::size_t>(v)] = static_cast<int>(pick);
    }
    if (ok) {
      out.samples.push_back(x);
      ++window_accepted;
    }
    if (window_attempts == kProposalWindow) {
      if (static_cast<double>(window_accepted) < kMinAcceptance * static_cast<double>(window_attempts)) {
        throw ProposalFailureError("proposal acceptance rate fell below 1e-4");
      }
      window_attempts = 0;
      window_accepted = 0;
    }
  }
  out.acceptance_rate = static_cast<double>(out.samples.size()) / static_cast<double>(attempts);
  return out;
}

SampleSet generate_samples(const GraphicalModel& model, const SamplerConfig& config) {
  return config.method == SamplerMethod::kGibbs ? gibbs_sample(model, config) : importance_sample(model, config);
}

SupportRelation project_samples(const SampleSet& samples, const Scope& scope, const std::vector<int>& model_cards) {
  std::vector<int> cards;
  cards.reserve(scope.size());
  for (VarId v : scope) cards.push_back(model_cards[static_cast<std::size_t>(v)]);
  TupleCodec codec(scope, cards);
  std::vector<TupleKey> keys;
  keys.reserve(samples.samples.size());
  for (const auto& s : samples.samples) keys.push_back(codec.encode_full(s));
  return SupportRelation(scope, std::move(cards), std::move(keys));
}

SupportRelation augment_support(const SupportRelation& support, const GraphicalModel& model,
                                const std::vector<int>& factor_ids, const SampleSet& samples) {
  if (factor_ids.empty()) return support;
  const Scope& scope = support.scope();
  const TupleCodec& codec = support.codec();
  std::vector<TupleKey> extra;
  std::vector<int> full(model.num_variables(), 0);
  for (int id : factor_ids) {
    const DenseFactor& f = model.factor(static_cast<std::size_t>(id));
    if (!scope_includes(scope, f.scope())) throw ContractError("factor scope is not covered by the cluster");
    Scope rest = scope_difference(scope, f.scope());
    SupportRelation completions = project_samples(samples, rest, model.cardinalities());
    std::vector<std::vector<int>> rest_tuples = completions.tuples();
    if (rest_tuples.empty()) rest_tuples.emplace_back(rest.size(), 0);
    std::vector<int> local(f.scope().size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!(f[i] > 0.0)) continue;
      f.decode(i, local);
      for (std::size_t j = 0; j < local.size(); ++j) full[static_cast<std::size_t>(f.scope()[j])] = local[j];
      for (const auto& r : rest_tuples) {
        for (std::size_t j = 0; j < r.size(); ++j) full[static_cast<std::size_t>(rest[j])] = r[j];
        extra.push_back(codec.encode_full(full));
      }
    }
  }
  return support.merged(SupportRelation(scope, support.cards(), std::move(extra)));
}

std::string dump_samples(const SampleSet& samples) {
  std::ostringstream out;
  for (const auto& s : samples.samples) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace smp
