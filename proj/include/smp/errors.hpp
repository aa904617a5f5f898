#pragma once

#include <stdexcept>
#include <string>

namespace smp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Precondition violated by the caller (e.g. summing out a variable not in scope).
class ContractError : public Error {
 public:
  using Error::Error;
};

// x / 0 with x > 0.
class DivisionSupportError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Enumeration or induced-width cap exceeded.
class CapError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class DeterminismError : public Error {
 public:
  using Error::Error;
};

class ProposalFailureError : public Error {
 public:
  using Error::Error;
};

class EmptyBeliefError : public Error {
 public:
  EmptyBeliefError(int vertex, const std::string& what) : Error(what), vertex_(vertex) {}
  int vertex() const noexcept { return vertex_; }

 private:
  int vertex_;
};

// A message whose every supported entry is zero.
class SupportStarvationError : public Error {
 public:
  SupportStarvationError(int from, int to, const std::string& what)
      : Error(what), from_(from), to_(to) {}
  int from() const noexcept { return from_; }
  int to() const noexcept { return to_; }

 private:
  int from_;
  int to_;
};

}  // namespace smp
