#include "smp/model.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "smp/errors.hpp"

namespace smp {

GraphicalModel::GraphicalModel(std::vector<int> cardinalities, std::vector<DenseFactor> factors)
    : cards_(std::move(cardinalities)), factors_(std::move(factors)) {
  if (cards_.empty()) throw ContractError("model must have at least one variable");
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    if (cards_[i] < 2) throw ContractError("variable " + std::to_string(i) + " has cardinality < 2");
  }
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& scope = factors_[f].scope();
    for (std::size_t i = 0; i < scope.size(); ++i) {
      VarId v = scope[i];
      if (v < 0 || static_cast<std::size_t>(v) >= cards_.size()) {
        throw ContractError("factor " + std::to_string(f) + " references unknown variable " + std::to_string(v));
      }
      if (factors_[f].cards()[i] != cards_[static_cast<std::size_t>(v)]) {
        throw ContractError("factor " + std::to_string(f) + " disagrees on cardinality of variable " +
                            std::to_string(v));
      }
    }
  }
}

std::vector<int> GraphicalModel::cards_of(const Scope& vars) const {
  std::vector<int> out;
  out.reserve(vars.size());
  for (VarId v : vars) out.push_back(cardinality(v));
  return out;
}

std::uint64_t GraphicalModel::configuration_count() const {
  std::uint64_t n = 1;
  for (int c : cards_) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(c)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= static_cast<std::uint64_t>(c);
  }
  return n;
}

std::size_t GraphicalModel::max_arity() const {
  std::size_t m = 0;
  for (const auto& f : factors_) m = std::max(m, f.scope().size());
  return m;
}

bool GraphicalModel::is_valid(const Assignment& x) const {
  if (x.size() != cards_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || x[i] >= cards_[i]) return false;
  }
  return true;
}

double evaluate_unnormalized(const GraphicalModel& model, std::span<const int> x) {
  double p = 1.0;
  for (const auto& f : model.factors()) {
    p *= f.at(x);
    if (p == 0.0) break;
  }
  return p;
}

void for_each_assignment(const std::vector<int>& cards, const std::function<void(const Assignment&)>& visit) {
  Assignment x(cards.size(), 0);
  for (;;) {
    visit(x);
    std::size_t i = cards.size();
    while (i-- > 0) {
      if (++x[i] < cards[i]) break;
      x[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

double partition_bruteforce(const GraphicalModel& model, std::uint64_t cap) {
  if (model.configuration_count() > cap) {
    throw CapError("model has more than " + std::to_string(cap) + " configurations");
  }
  double z = 0.0;
  for_each_assignment(model.cardinalities(), [&](const Assignment& x) { z += evaluate_unnormalized(model, x); });
  return z;
}

}  // namespace smp
