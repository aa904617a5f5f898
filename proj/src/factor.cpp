#include "smp/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "smp/errors.hpp"

namespace smp {

namespace {

std::size_t table_size(const std::vector<int>& cards) {
  std::size_t n = 1;
  for (int c : cards) n *= static_cast<std::size_t>(c);
  return n;
}

// Strides of `sub` laid out inside the row-major index space of `full`;
// variables of `full` missing from `sub` get stride 0.
std::vector<std::size_t> embedded_strides(const Scope& full, const Scope& sub,
                                          const std::vector<int>& sub_cards) {
  std::vector<std::size_t> own(sub.size());
  std::size_t s = 1;
  for (std::size_t i = sub.size(); i-- > 0;) {
    own[i] = s;
    s *= static_cast<std::size_t>(sub_cards[i]);
  }
  std::vector<std::size_t> out(full.size(), 0);
  std::size_t j = 0;
  for (std::size_t i = 0; i < full.size() && j < sub.size(); ++i) {
    if (full[i] == sub[j]) out[i] = own[j++];
  }
  return out;
}

// Odometer over the cells of a scope, tracking the flat index of up to two
// embedded sub-scopes.
class Odometer {
 public:
  Odometer(const std::vector<int>& cards, std::vector<std::size_t> sa, std::vector<std::size_t> sb)
      : cards_(cards), digits_(cards.size(), 0), sa_(std::move(sa)), sb_(std::move(sb)) {}

  std::size_t a() const { return ia_; }
  std::size_t b() const { return ib_; }

  void next() {
    for (std::size_t i = cards_.size(); i-- > 0;) {
      if (++digits_[i] < cards_[i]) {
        ia_ += sa_[i];
        ib_ += sb_[i];
        return;
      }
      ia_ -= sa_[i] * static_cast<std::size_t>(cards_[i] - 1);
      ib_ -= sb_[i] * static_cast<std::size_t>(cards_[i] - 1);
      digits_[i] = 0;
    }
  }

 private:
  const std::vector<int>& cards_;
  std::vector<int> digits_;
  std::vector<std::size_t> sa_, sb_;
  std::size_t ia_ = 0, ib_ = 0;
};

void check_values(const std::vector<double>& values) {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ContractError("factor values must be finite and nonnegative");
    }
  }
}

// Cardinalities of `vars` looked up in either factor.
std::vector<int> merged_cards(const Scope& vars, const DenseFactor& f, const DenseFactor& g) {
  std::vector<int> cards(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    int cf = f.cardinality(vars[i]);
    int cg = g.cardinality(vars[i]);
    if (cf && cg && cf != cg) {
      throw ContractError("cardinality mismatch on variable " + std::to_string(vars[i]));
    }
    cards[i] = cf ? cf : cg;
  }
  return cards;
}

}  // namespace

DenseFactor::DenseFactor() : values_{1.0} {}

DenseFactor::DenseFactor(Scope vars, std::vector<int> cards, std::vector<double> values)
    : scope_(std::move(vars)), cards_(std::move(cards)), values_(std::move(values)) {
  if (scope_.size() != cards_.size()) throw ContractError("scope/cardinality length mismatch");
  for (std::size_t i = 1; i < scope_.size(); ++i) {
    if (scope_[i - 1] >= scope_[i]) throw ContractError("factor scope must be sorted and distinct");
  }
  for (int c : cards_) {
    if (c < 1) throw ContractError("cardinality must be positive");
  }
  if (values_.size() != table_size(cards_)) {
    throw ContractError("table length " + std::to_string(values_.size()) + " does not match scope size " +
                        std::to_string(table_size(cards_)));
  }
  check_values(values_);
}

DenseFactor DenseFactor::scalar(double value) { return DenseFactor({}, {}, {value}); }

DenseFactor DenseFactor::constant(Scope vars, std::vector<int> cards, double value) {
  std::vector<double> values(table_size(cards), value);
  return DenseFactor(std::move(vars), std::move(cards), std::move(values));
}

DenseFactor DenseFactor::from_table(const std::vector<VarId>& vars, const std::vector<int>& cards,
                                    const std::vector<double>& values) {
  if (vars.size() != cards.size()) throw ContractError("scope/cardinality length mismatch");
  std::vector<std::size_t> perm(vars.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return vars[a] < vars[b]; });
  Scope sorted(vars.size());
  std::vector<int> sorted_cards(vars.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    sorted[i] = vars[perm[i]];
    sorted_cards[i] = cards[perm[i]];
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1] == sorted[i]) throw ContractError("duplicate variable in factor scope");
  }
  if (values.size() != table_size(cards)) {
    throw ContractError("table length " + std::to_string(values.size()) + " does not match scope size " +
                        std::to_string(table_size(cards)));
  }
  // Walk the file order; strides map each file cell into canonical layout.
  auto strides = embedded_strides(sorted, sorted, sorted_cards);
  std::vector<std::size_t> file_strides(vars.size());
  for (std::size_t i = 0; i < perm.size(); ++i) file_strides[perm[i]] = strides[i];
  std::vector<double> out(values.size());
  Odometer it(cards, file_strides, std::vector<std::size_t>(vars.size(), 0));
  for (std::size_t i = 0; i < values.size(); ++i, it.next()) out[it.a()] = values[i];
  return DenseFactor(std::move(sorted), std::move(sorted_cards), std::move(out));
}

int DenseFactor::cardinality(VarId v) const {
  auto it = std::lower_bound(scope_.begin(), scope_.end(), v);
  if (it == scope_.end() || *it != v) return 0;
  return cards_[static_cast<std::size_t>(it - scope_.begin())];
}

bool DenseFactor::contains(VarId v) const { return std::binary_search(scope_.begin(), scope_.end(), v); }

std::size_t DenseFactor::index_of(std::span<const int> full_assignment) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    idx = idx * static_cast<std::size_t>(cards_[i]) +
          static_cast<std::size_t>(full_assignment[static_cast<std::size_t>(scope_[i])]);
  }
  return idx;
}

double DenseFactor::at(std::span<const int> full_assignment) const {
  return values_[index_of(full_assignment)];
}

void DenseFactor::decode(std::size_t index, std::span<int> out) const {
  for (std::size_t i = scope_.size(); i-- > 0;) {
    out[i] = static_cast<int>(index % static_cast<std::size_t>(cards_[i]));
    index /= static_cast<std::size_t>(cards_[i]);
  }
}

double DenseFactor::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Scope scope_union(const Scope& a, const Scope& b) {
  Scope out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Scope scope_intersection(const Scope& a, const Scope& b) {
  Scope out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Scope scope_difference(const Scope& a, const Scope& b) {
  Scope out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool scope_includes(const Scope& outer, const Scope& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

DenseFactor factor_product(const DenseFactor& f, const DenseFactor& g, OpStats* stats) {
  Scope vars = scope_union(f.scope(), g.scope());
  std::vector<int> cards = merged_cards(vars, f, g);
  std::vector<double> values(table_size(cards));
  Odometer it(cards, embedded_strides(vars, f.scope(), f.cards()),
              embedded_strides(vars, g.scope(), g.cards()));
  for (std::size_t i = 0; i < values.size(); ++i, it.next()) values[i] = f[it.a()] * g[it.b()];
  if (stats) stats->visits += f.size() + g.size() + values.size();
  return DenseFactor(std::move(vars), std::move(cards), std::move(values));
}

DenseFactor factor_sum_out(const DenseFactor& f, const Scope& vars, OpStats* stats) {
  if (!scope_includes(f.scope(), vars)) throw ContractError("sum_out: variables not in factor scope");
  if (vars.empty()) return f;
  Scope keep = scope_difference(f.scope(), vars);
  std::vector<int> keep_cards;
  for (VarId v : keep) keep_cards.push_back(f.cardinality(v));
  std::vector<double> out(table_size(keep_cards), 0.0);
  Odometer it(f.cards(), embedded_strides(f.scope(), keep, keep_cards),
              std::vector<std::size_t>(f.scope().size(), 0));
  for (std::size_t i = 0; i < f.size(); ++i, it.next()) out[it.a()] += f[i];
  if (stats) stats->visits += f.size() + out.size();
  return DenseFactor(std::move(keep), std::move(keep_cards), std::move(out));
}

DenseFactor factor_marginal(const DenseFactor& f, const Scope& keep, OpStats* stats) {
  return factor_sum_out(f, scope_difference(f.scope(), keep), stats);
}

DenseFactor factor_divide(const DenseFactor& f, const DenseFactor& g, OpStats* stats) {
  if (!scope_includes(f.scope(), g.scope())) throw ContractError("divide: divisor scope not contained in dividend");
  merged_cards(f.scope(), f, g);
  std::vector<double> out(f.size());
  Odometer it(f.cards(), embedded_strides(f.scope(), g.scope(), g.cards()),
              std::vector<std::size_t>(f.scope().size(), 0));
  for (std::size_t i = 0; i < f.size(); ++i, it.next()) {
    double den = g[it.a()];
    if (den == 0.0) {
      if (f[i] != 0.0) throw DivisionSupportError("division by zero at index " + std::to_string(i));
      out[i] = 0.0;
    } else {
      out[i] = f[i] / den;
    }
  }
  if (stats) stats->visits += f.size() + g.size() + out.size();
  return DenseFactor(f.scope(), f.cards(), std::move(out));
}

DenseFactor normalize(const DenseFactor& f) {
  double z = f.sum();
  if (!(z > 0.0)) throw NormalizationError("cannot normalize an all-zero factor");
  std::vector<double> values = f.values();
  for (double& v : values) v /= z;
  return DenseFactor(f.scope(), f.cards(), std::move(values));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // rounding can push identical inputs a hair below zero
  return std::max(kl, 0.0);
}

double kl_divergence(const DenseFactor& p, const DenseFactor& q) {
  if (p.scope() != q.scope()) throw ContractError("kl_divergence: scope mismatch");
  DenseFactor pn = normalize(p);
  DenseFactor qn = normalize(q);
  return kl_divergence(pn.values(), qn.values());
}

double max_abs_diff(const DenseFactor& a, const DenseFactor& b) {
  if (a.scope() != b.scope()) throw ContractError("max_abs_diff: scope mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace smp
