#include "smp/sparse_table.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "smp/errors.hpp"

namespace smp {

TupleCodec::TupleCodec(Scope scope, std::vector<int> cards)
    : scope_(std::move(scope)), cards_(std::move(cards)), strides_(scope_.size()) {
  if (scope_.size() != cards_.size()) throw ContractError("scope/cardinality length mismatch");
  for (std::size_t i = scope_.size(); i-- > 0;) {
    strides_[i] = space_;
    auto c = static_cast<std::uint64_t>(cards_[i]);
    if (space_ > std::numeric_limits<std::uint64_t>::max() / c) throw ContractError("tuple space overflows 64 bits");
    space_ *= c;
  }
}

TupleKey TupleCodec::encode(std::span<const int> local) const {
  TupleKey k = 0;
  for (std::size_t i = 0; i < strides_.size(); ++i) k += static_cast<std::uint64_t>(local[i]) * strides_[i];
  return k;
}

TupleKey TupleCodec::encode_full(std::span<const int> full) const {
  TupleKey k = 0;
  for (std::size_t i = 0; i < strides_.size(); ++i) {
    k += static_cast<std::uint64_t>(full[static_cast<std::size_t>(scope_[i])]) * strides_[i];
  }
  return k;
}

void TupleCodec::decode(TupleKey key, std::span<int> local) const {
  for (std::size_t i = scope_.size(); i-- > 0;) {
    auto c = static_cast<std::uint64_t>(cards_[i]);
    local[i] = static_cast<int>(key % c);
    key /= c;
  }
}

void TupleCodec::scatter(TupleKey key, std::span<int> full) const {
  for (std::size_t i = scope_.size(); i-- > 0;) {
    auto c = static_cast<std::uint64_t>(cards_[i]);
    full[static_cast<std::size_t>(scope_[i])] = static_cast<int>(key % c);
    key /= c;
  }
}

SupportRelation::SupportRelation(Scope scope, std::vector<int> cards, std::vector<TupleKey> keys)
    : codec_(std::move(scope), std::move(cards)), keys_(std::move(keys)) {
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  if (!keys_.empty() && keys_.back() >= codec_.space_size()) throw ContractError("support tuple out of domain");
}

SupportRelation SupportRelation::full(Scope scope, std::vector<int> cards) {
  TupleCodec codec(scope, cards);
  std::vector<TupleKey> keys(codec.space_size());
  for (TupleKey k = 0; k < keys.size(); ++k) keys[k] = k;
  return SupportRelation(std::move(scope), std::move(cards), std::move(keys));
}

bool SupportRelation::contains(TupleKey key) const { return std::binary_search(keys_.begin(), keys_.end(), key); }

std::vector<std::vector<int>> SupportRelation::tuples() const {
  std::vector<std::vector<int>> out;
  out.reserve(keys_.size());
  for (TupleKey k : keys_) {
    std::vector<int> t(scope().size());
    codec_.decode(k, t);
    out.push_back(std::move(t));
  }
  return out;
}

SupportRelation SupportRelation::merged(const SupportRelation& other) const {
  if (scope() != other.scope()) throw ContractError("support union over different scopes");
  std::vector<TupleKey> keys;
  std::set_union(keys_.begin(), keys_.end(), other.keys_.begin(), other.keys_.end(), std::back_inserter(keys));
  return SupportRelation(scope(), cards(), std::move(keys));
}

SupportRelation SupportRelation::project(const Scope& sub) const {
  if (!scope_includes(scope(), sub)) throw ContractError("support projection onto a non-subset scope");
  std::vector<int> sub_cards;
  std::vector<std::size_t> pos;
  for (VarId v : sub) {
    auto it = std::lower_bound(scope().begin(), scope().end(), v);
    pos.push_back(static_cast<std::size_t>(it - scope().begin()));
    sub_cards.push_back(cards()[pos.back()]);
  }
  TupleCodec sub_codec(sub, sub_cards);
  std::vector<int> local(scope().size()), sub_local(sub.size());
  std::vector<TupleKey> keys;
  keys.reserve(keys_.size());
  for (TupleKey k : keys_) {
    codec_.decode(k, local);
    for (std::size_t i = 0; i < pos.size(); ++i) sub_local[i] = local[pos[i]];
    keys.push_back(sub_codec.encode(sub_local));
  }
  return SupportRelation(sub, std::move(sub_cards), std::move(keys));
}

DenseFactor SupportRelation::indicator() const {
  std::vector<double> values(codec_.space_size(), 0.0);
  for (TupleKey k : keys_) values[k] = 1.0;
  return DenseFactor(scope(), cards(), std::move(values));
}

SparseTable::SparseTable(Scope scope, std::vector<int> cards) : codec_(std::move(scope), std::move(cards)) {}

double SparseTable::get(TupleKey key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

void SparseTable::set(TupleKey key, double value) {
  if (!(value >= 0.0)) throw ContractError("sparse table values must be nonnegative");
  if (key >= codec_.space_size()) throw ContractError("sparse tuple out of domain");
  if (value == 0.0) {
    entries_.erase(key);
  } else {
    entries_[key] = value;
  }
}

void SparseTable::accumulate(TupleKey key, double value) {
  if (value == 0.0) return;
  entries_[key] += value;
}

double SparseTable::sum() const {
  double s = 0.0;
  for (const auto& [k, v] : entries_) s += v;
  return s;
}

SparseTable sparse_from_dense(const DenseFactor& f, OpStats* stats) {
  SparseTable t(f.scope(), f.cards());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0) t.set(i, f[i]);
  }
  if (stats) stats->visits += f.size() + t.size();
  return t;
}

DenseFactor sparse_to_dense(const SparseTable& t) {
  std::vector<double> values(t.codec().space_size(), 0.0);
  for (const auto& [k, v] : t.entries()) values[k] = v;
  return DenseFactor(t.scope(), t.cards(), std::move(values));
}

namespace {

std::vector<int> union_cards(const Scope& vars, const SparseTable& a, const SparseTable& b) {
  std::vector<int> cards(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    int ca = 0, cb = 0;
    auto ia = std::lower_bound(a.scope().begin(), a.scope().end(), vars[i]);
    if (ia != a.scope().end() && *ia == vars[i]) ca = a.cards()[static_cast<std::size_t>(ia - a.scope().begin())];
    auto ib = std::lower_bound(b.scope().begin(), b.scope().end(), vars[i]);
    if (ib != b.scope().end() && *ib == vars[i]) cb = b.cards()[static_cast<std::size_t>(ib - b.scope().begin())];
    if (ca && cb && ca != cb) throw ContractError("cardinality mismatch on variable " + std::to_string(vars[i]));
    cards[i] = ca ? ca : cb;
  }
  return cards;
}

// Stride of each variable of `sub` inside `codec`'s key space (0 if absent).
std::vector<std::uint64_t> strides_in(const TupleCodec& codec, const Scope& sub) {
  std::vector<std::uint64_t> full(codec.scope().size());
  std::uint64_t s = 1;
  for (std::size_t i = codec.scope().size(); i-- > 0;) {
    full[i] = s;
    s *= static_cast<std::uint64_t>(codec.cards()[i]);
  }
  std::vector<std::uint64_t> out(sub.size(), 0);
  for (std::size_t i = 0; i < sub.size(); ++i) {
    auto it = std::lower_bound(codec.scope().begin(), codec.scope().end(), sub[i]);
    if (it != codec.scope().end() && *it == sub[i]) out[i] = full[static_cast<std::size_t>(it - codec.scope().begin())];
  }
  return out;
}

// Re-encodes keys of `from` into the key space of another scope: the result
// is the sum over variables of digit * target stride.
class KeyMapper {
 public:
  KeyMapper(const TupleCodec& from, const TupleCodec& to) : from_(from), strides_(strides_in(to, from.scope())),
                                                            digits_(from.scope().size()) {}
  KeyMapper(const TupleCodec& from, const TupleCodec& to, const Scope& only)
      : from_(from), strides_(strides_in(to, from.scope())), digits_(from.scope().size()) {
    for (std::size_t i = 0; i < strides_.size(); ++i) {
      if (!std::binary_search(only.begin(), only.end(), from.scope()[i])) strides_[i] = 0;
    }
  }

  TupleKey operator()(TupleKey key) {
    from_.decode(key, digits_);
    TupleKey out = 0;
    for (std::size_t i = 0; i < digits_.size(); ++i) out += static_cast<std::uint64_t>(digits_[i]) * strides_[i];
    return out;
  }

 private:
  const TupleCodec& from_;
  std::vector<std::uint64_t> strides_;
  std::vector<int> digits_;
};

}  // namespace

SparseTable sparse_product(const SparseTable& a, const SparseTable& b, OpStats* stats) {
  Scope vars = scope_union(a.scope(), b.scope());
  SparseTable out(vars, union_cards(vars, a, b));
  const SparseTable& small = a.size() <= b.size() ? a : b;
  const SparseTable& large = a.size() <= b.size() ? b : a;
  Scope shared = scope_intersection(a.scope(), b.scope());
  std::vector<int> shared_cards;
  for (VarId v : shared) {
    auto it = std::lower_bound(vars.begin(), vars.end(), v);
    shared_cards.push_back(out.cards()[static_cast<std::size_t>(it - vars.begin())]);
  }
  TupleCodec shared_codec(shared, std::move(shared_cards));
  Scope small_only = scope_difference(small.scope(), shared);

  KeyMapper small_shared(small.codec(), shared_codec);
  KeyMapper small_out(small.codec(), out.codec(), small_only);
  KeyMapper large_shared(large.codec(), shared_codec);
  KeyMapper large_out(large.codec(), out.codec());

  std::uint64_t visits = 0;
  std::unordered_map<TupleKey, std::vector<std::pair<TupleKey, double>>> index;
  index.reserve(small.size());
  for (const auto& [k, v] : small.entries()) {
    ++visits;
    index[small_shared(k)].emplace_back(small_out(k), v);
  }
  for (const auto& [k, v] : large.entries()) {
    ++visits;
    auto it = index.find(large_shared(k));
    if (it == index.end()) continue;
    TupleKey base = large_out(k);
    for (const auto& [partial, sv] : it->second) {
      ++visits;
      double p = v * sv;
      if (p > 0.0) out.set(base + partial, p);
    }
  }
  if (stats) stats->visits += visits;
  return out;
}

SparseTable sparse_sum_out(const SparseTable& t, const Scope& vars, OpStats* stats) {
  if (!scope_includes(t.scope(), vars)) throw ContractError("sum_out: variables not in table scope");
  if (vars.empty()) return t;
  Scope keep = scope_difference(t.scope(), vars);
  std::vector<int> keep_cards;
  for (VarId v : keep) {
    auto it = std::lower_bound(t.scope().begin(), t.scope().end(), v);
    keep_cards.push_back(t.cards()[static_cast<std::size_t>(it - t.scope().begin())]);
  }
  SparseTable out(keep, std::move(keep_cards));
  KeyMapper to_keep(t.codec(), out.codec());
  for (const auto& [k, v] : t.entries()) out.accumulate(to_keep(k), v);
  if (stats) stats->visits += t.size() + out.size();
  return out;
}

SparseTable sparse_divide(const SparseTable& a, const SparseTable& b, OpStats* stats) {
  if (!scope_includes(a.scope(), b.scope())) throw ContractError("divide: divisor scope not contained in dividend");
  union_cards(a.scope(), a, b);
  SparseTable out(a.scope(), a.cards());
  KeyMapper to_b(a.codec(), b.codec());
  for (const auto& [k, v] : a.entries()) {
    double den = b.get(to_b(k));
    if (den == 0.0) throw DivisionSupportError("sparse divide: dividend entry " + std::to_string(k) +
                                               " has no divisor entry");
    out.set(k, v / den);
  }
  if (stats) stats->visits += 2 * a.size() + out.size();
  return out;
}

SparseTable sparse_lossy_project(const SparseTable& phi, const SupportRelation& support, OpStats* stats) {
  if (phi.scope() != support.scope()) throw ContractError("lossy projection onto a support over another scope");
  SparseTable out(phi.scope(), phi.cards());
  if (phi.size() <= support.size()) {
    for (const auto& [k, v] : phi.entries()) {
      if (support.contains(k)) out.set(k, v);
    }
    if (stats) stats->visits += phi.size() + out.size();
  } else {
    for (TupleKey k : support.keys()) {
      double v = phi.get(k);
      if (v > 0.0) out.set(k, v);
    }
    if (stats) stats->visits += support.size() + out.size();
  }
  return out;
}

SparseTable sparse_normalize(const SparseTable& t) {
  double z = t.sum();
  if (!(z > 0.0)) throw NormalizationError("cannot normalize an empty sparse table");
  SparseTable out(t.scope(), t.cards());
  for (const auto& [k, v] : t.entries()) out.set(k, v / z);
  return out;
}

}  // namespace smp
