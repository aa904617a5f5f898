#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smp {

using VarId = int;

/// Sorted list of distinct variable indices.
using Scope = std::vector<VarId>;

// Work counter shared by the table-based operators. One unit per table cell
// (dense) or stored entry (sparse) read or written.
struct OpStats {
  std::uint64_t visits = 0;
};

/// A nonnegative function over a set of discrete variables.
///
/// The scope is kept sorted by variable index and values are laid out
/// row-major with the last scope variable varying fastest, so two factors
/// over the same scope can be compared cell by cell.
class DenseFactor {
 public:
  // The scalar 1.
  DenseFactor();

  // `vars` must be sorted and distinct; `values` in canonical row-major order.
  DenseFactor(Scope vars, std::vector<int> cards, std::vector<double> values);

  static DenseFactor scalar(double value);
  static DenseFactor constant(Scope vars, std::vector<int> cards, double value);

  // Builds a factor from a table whose scope is in arbitrary order (as found
  // in model files); the table is permuted into canonical order.
  static DenseFactor from_table(const std::vector<VarId>& vars, const std::vector<int>& cards,
                                const std::vector<double>& values);

  const Scope& scope() const noexcept { return scope_; }
  const std::vector<int>& cards() const noexcept { return cards_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_scalar() const noexcept { return scope_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }

  // Cardinality of `v`, or 0 when `v` is not in scope.
  int cardinality(VarId v) const;
  bool contains(VarId v) const;

  // Value at a full model assignment (indexed by variable id).
  double at(std::span<const int> full_assignment) const;

  // Flat index of a full model assignment.
  std::size_t index_of(std::span<const int> full_assignment) const;

  // Writes the scope-local assignment of cell `index` into `out` (by position).
  void decode(std::size_t index, std::span<int> out) const;

  double sum() const;

 private:
  Scope scope_;
  std::vector<int> cards_;
  std::vector<double> values_;
};

DenseFactor factor_product(const DenseFactor& f, const DenseFactor& g, OpStats* stats = nullptr);

// Sums out `vars` (must be a subset of the scope).
DenseFactor factor_sum_out(const DenseFactor& f, const Scope& vars, OpStats* stats = nullptr);

// Sums out everything except `keep`.
DenseFactor factor_marginal(const DenseFactor& f, const Scope& keep, OpStats* stats = nullptr);

// Pointwise f / g with 0/0 = 0. scope(g) must be a subset of scope(f).
DenseFactor factor_divide(const DenseFactor& f, const DenseFactor& g, OpStats* stats = nullptr);

DenseFactor normalize(const DenseFactor& f);

// KL(p || q) after normalizing both; +infinity when q misses mass of p.
double kl_divergence(const DenseFactor& p, const DenseFactor& q);

// Same as above on already-normalized probability vectors.
double kl_divergence(std::span<const double> p, std::span<const double> q);

double max_abs_diff(const DenseFactor& a, const DenseFactor& b);

Scope scope_union(const Scope& a, const Scope& b);
Scope scope_intersection(const Scope& a, const Scope& b);
Scope scope_difference(const Scope& a, const Scope& b);
bool scope_includes(const Scope& outer, const Scope& inner);

}  // namespace smp
