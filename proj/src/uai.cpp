#include "smp/uai.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "smp/errors.hpp"

namespace smp {

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }

  int line() const { return line_; }

  std::string_view next(const char* what) {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(line_, std::string("unexpected end of file, expected ") + what);
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  long long integer(const char* what) {
    auto tok = next(what);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(line_, std::string("expected integer ") + what + ", got '" + std::string(tok) + "'");
    }
    return v;
  }

  double real(const char* what) {
    auto tok = next(what);
    std::string s(tok);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
      throw ParseError(line_, std::string("expected number ") + what + ", got '" + s + "'");
    }
    return v;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

GraphicalModel parse_uai(std::string_view text) {
  Tokens tok(text);
  auto header = tok.next("preamble");
  if (header != "MARKOV") {
    throw ParseError(tok.line(), "expected MARKOV preamble, got '" + std::string(header) + "'");
  }
  long long n = tok.integer("variable count");
  if (n <= 0) throw ParseError(tok.line(), "variable count must be positive");
  std::vector<int> cards(static_cast<std::size_t>(n));
  for (auto& c : cards) {
    long long v = tok.integer("cardinality");
    if (v < 2) throw ParseError(tok.line(), "cardinality must be at least 2");
    c = static_cast<int>(v);
  }
  long long m = tok.integer("factor count");
  if (m < 0) throw ParseError(tok.line(), "factor count must be nonnegative");
  std::vector<std::vector<VarId>> scopes(static_cast<std::size_t>(m));
  for (auto& scope : scopes) {
    long long arity = tok.integer("arity");
    if (arity < 0 || arity > n) throw ParseError(tok.line(), "bad arity " + std::to_string(arity));
    for (long long i = 0; i < arity; ++i) {
      long long v = tok.integer("scope variable");
      if (v < 0 || v >= n) throw ParseError(tok.line(), "scope references unknown variable " + std::to_string(v));
      scope.push_back(static_cast<VarId>(v));
    }
  }
  std::vector<DenseFactor> factors;
  factors.reserve(scopes.size());
  for (const auto& scope : scopes) {
    std::vector<int> fc;
    std::size_t expected = 1;
    for (VarId v : scope) {
      fc.push_back(cards[static_cast<std::size_t>(v)]);
      expected *= static_cast<std::size_t>(fc.back());
    }
    long long len = tok.integer("table length");
    int len_line = tok.line();
    if (len < 0 || static_cast<std::size_t>(len) != expected) {
      throw ParseError(len_line, "table length " + std::to_string(len) + " does not match scope size " +
                                     std::to_string(expected));
    }
    std::vector<double> values(expected);
    for (auto& v : values) {
      v = tok.real("table entry");
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError(tok.line(), "table entries must be finite and nonnegative");
    }
    try {
      factors.push_back(DenseFactor::from_table(scope, fc, values));
    } catch (const ContractError& e) {
      throw ParseError(len_line, e.what());
    }
  }
  if (!tok.done()) throw ParseError(tok.line(), "trailing content after last table");
  return GraphicalModel(std::move(cards), std::move(factors));
}

GraphicalModel read_uai_file(const std::string& path) { return parse_uai(slurp(path)); }

std::string write_uai(const GraphicalModel& model) {
  std::ostringstream out;
  out << "MARKOV\n" << model.num_variables() << '\n';
  for (std::size_t i = 0; i < model.num_variables(); ++i) {
    out << (i ? " " : "") << model.cardinality(static_cast<VarId>(i));
  }
  out << '\n' << model.num_factors() << '\n';
  for (const auto& f : model.factors()) {
    out << f.scope().size();
    for (VarId v : f.scope()) out << ' ' << v;
    out << '\n';
  }
  out << std::setprecision(17);
  for (const auto& f : model.factors()) {
    out << '\n' << f.size() << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? " " : "") << f[i];
    out << '\n';
  }
  return out.str();
}

Evidence parse_evidence(std::string_view text) {
  Tokens tok(text);
  if (tok.done()) return {};
  long long count = tok.integer("evidence count");
  if (count < 0) throw ParseError(tok.line(), "evidence count must be nonnegative");
  Evidence ev;
  for (long long i = 0; i < count; ++i) {
    long long var = tok.integer("evidence variable");
    long long val = tok.integer("evidence value");
    ev.emplace_back(static_cast<VarId>(var), static_cast<int>(val));
  }
  if (!tok.done()) throw ParseError(tok.line(), "trailing content after evidence");
  return ev;
}

Evidence read_evidence_file(const std::string& path) { return parse_evidence(slurp(path)); }

GraphicalModel absorb_evidence(const GraphicalModel& model, const Evidence& evidence) {
  Assignment observed(model.num_variables(), -1);
  for (auto [var, val] : evidence) {
    if (var < 0 || static_cast<std::size_t>(var) >= model.num_variables()) {
      throw ContractError("evidence on unknown variable " + std::to_string(var));
    }
    if (val < 0 || val >= model.cardinality(var)) {
      throw ContractError("evidence value out of domain for variable " + std::to_string(var));
    }
    observed[static_cast<std::size_t>(var)] = val;
  }
  std::vector<DenseFactor> factors;
  std::vector<int> local;
  for (const auto& f : model.factors()) {
    std::vector<double> values = f.values();
    local.resize(f.scope().size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      f.decode(i, local);
      for (std::size_t j = 0; j < local.size(); ++j) {
        int o = observed[static_cast<std::size_t>(f.scope()[j])];
        if (o >= 0 && o != local[j]) {
          values[i] = 0.0;
          break;
        }
      }
    }
    factors.emplace_back(f.scope(), f.cards(), std::move(values));
  }
  // Variables no factor mentions get a unary indicator instead.
  std::vector<bool> mentioned(model.num_variables(), false);
  for (const auto& f : model.factors()) {
    for (VarId v : f.scope()) mentioned[static_cast<std::size_t>(v)] = true;
  }
  for (auto [var, val] : evidence) {
    if (mentioned[static_cast<std::size_t>(var)]) continue;
    std::vector<double> ind(static_cast<std::size_t>(model.cardinality(var)), 0.0);
    ind[static_cast<std::size_t>(val)] = 1.0;
    factors.emplace_back(Scope{var}, std::vector<int>{model.cardinality(var)}, std::move(ind));
  }
  return GraphicalModel(model.cardinalities(), std::move(factors));
}

}  // namespace smp
