#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "smp/factor.hpp"

namespace smp {

struct Variable {
  VarId index = 0;
  int cardinality = 2;
};

using Assignment = std::vector<int>;

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

/// A Markov network: variables with finite domains and nonnegative factors
/// whose product defines the unnormalized distribution.
class GraphicalModel {
 public:
  GraphicalModel() = default;
  GraphicalModel(std::vector<int> cardinalities, std::vector<DenseFactor> factors);

  std::size_t num_variables() const noexcept { return cards_.size(); }
  std::size_t num_factors() const noexcept { return factors_.size(); }
  Variable variable(VarId v) const { return {v, cards_[static_cast<std::size_t>(v)]}; }
  int cardinality(VarId v) const { return cards_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& cardinalities() const noexcept { return cards_; }
  const std::vector<DenseFactor>& factors() const noexcept { return factors_; }
  const DenseFactor& factor(std::size_t i) const { return factors_[i]; }

  std::vector<int> cards_of(const Scope& vars) const;

  // Number of complete assignments, saturating at UINT64_MAX.
  std::uint64_t configuration_count() const;

  std::size_t max_arity() const;

  bool is_valid(const Assignment& x) const;

 private:
  std::vector<int> cards_;
  std::vector<DenseFactor> factors_;
};

double evaluate_unnormalized(const GraphicalModel& model, std::span<const int> x);

// Calls `visit` on every complete assignment in lexicographic order.
void for_each_assignment(const std::vector<int>& cards, const std::function<void(const Assignment&)>& visit);

double partition_bruteforce(const GraphicalModel& model, std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace smp
