#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "smp/factor.hpp"

namespace smp {

using TupleKey = std::uint64_t;

// Row-major encoding of tuples over a fixed scope (last variable fastest), so
// a key equals the dense-table index of the same tuple.
class TupleCodec {
 public:
  TupleCodec() = default;
  TupleCodec(Scope scope, std::vector<int> cards);

  const Scope& scope() const noexcept { return scope_; }
  const std::vector<int>& cards() const noexcept { return cards_; }
  std::uint64_t space_size() const noexcept { return space_; }

  TupleKey encode(std::span<const int> local) const;
  // Encodes the restriction of a full model assignment.
  TupleKey encode_full(std::span<const int> full) const;
  void decode(TupleKey key, std::span<int> local) const;
  // Writes this scope's values into a full model assignment.
  void scatter(TupleKey key, std::span<int> full) const;

 private:
  Scope scope_;
  std::vector<int> cards_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t space_ = 1;
};

/// Set of tuples over a scope that are allowed to carry nonzero weight.
class SupportRelation {
 public:
  SupportRelation() = default;
  SupportRelation(Scope scope, std::vector<int> cards, std::vector<TupleKey> keys = {});

  // Every tuple of the scope.
  static SupportRelation full(Scope scope, std::vector<int> cards);

  const Scope& scope() const noexcept { return codec_.scope(); }
  const std::vector<int>& cards() const noexcept { return codec_.cards(); }
  const TupleCodec& codec() const noexcept { return codec_; }
  // Sorted, distinct.
  const std::vector<TupleKey>& keys() const noexcept { return keys_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  bool contains(TupleKey key) const;
  bool contains_tuple(std::span<const int> local) const { return contains(codec_.encode(local)); }

  std::vector<std::vector<int>> tuples() const;

  // Set union; scopes must match.
  SupportRelation merged(const SupportRelation& other) const;

  // Distinct restrictions of the tuples to `sub` (a subset of the scope).
  SupportRelation project(const Scope& sub) const;

  DenseFactor indicator() const;

 private:
  TupleCodec codec_;
  std::vector<TupleKey> keys_;
};

/// Zero-suppressed table: only tuples with strictly positive value are stored.
class SparseTable {
 public:
  SparseTable() : codec_({}, {}) {}
  SparseTable(Scope scope, std::vector<int> cards);

  const Scope& scope() const noexcept { return codec_.scope(); }
  const std::vector<int>& cards() const noexcept { return codec_.cards(); }
  const TupleCodec& codec() const noexcept { return codec_; }
  const std::unordered_map<TupleKey, double>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Value at a tuple; 0 when absent.
  double get(TupleKey key) const;
  // Stores `value`; zero erases the entry.
  void set(TupleKey key, double value);
  void accumulate(TupleKey key, double value);

  double sum() const;

 private:
  TupleCodec codec_;
  std::unordered_map<TupleKey, double> entries_;
};

SparseTable sparse_from_dense(const DenseFactor& f, OpStats* stats = nullptr);
DenseFactor sparse_to_dense(const SparseTable& t);

// Hash join: index on the smaller operand keyed by the shared variables, probe
// with the larger.
SparseTable sparse_product(const SparseTable& a, const SparseTable& b, OpStats* stats = nullptr);

SparseTable sparse_sum_out(const SparseTable& t, const Scope& vars, OpStats* stats = nullptr);

// Pointwise a / b over a's entries. Throws DivisionSupportError when an entry
// of `a` projects onto a tuple absent from `b`.
SparseTable sparse_divide(const SparseTable& a, const SparseTable& b, OpStats* stats = nullptr);

// Keeps the entries of `phi` that lie in `support`. Each sparse entry is a
// feature with a single solution, so the mean over it is the entry itself.
SparseTable sparse_lossy_project(const SparseTable& phi, const SupportRelation& support,
                                 OpStats* stats = nullptr);

SparseTable sparse_normalize(const SparseTable& t);

}  // namespace smp
