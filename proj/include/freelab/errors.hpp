#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace freelab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration would exceed its configured size cap.
class EnumerationLimitError : public Error {
 public:
  EnumerationLimitError(const std::string& what, int requested, int cap)
      : Error(what + ": requested size " + std::to_string(requested) +
              " exceeds the enumeration cap " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}

  int requested() const noexcept { return requested_; }
  int cap() const noexcept { return cap_; }

 private:
  int requested_;
  int cap_;
};

/// Malformed textual input; `position` is the 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// The eigensolver failed to converge or produced a bad residual.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::optional<std::uint64_t> seed)
      : Error(seed ? what + " (matrix seed " + std::to_string(*seed) + ")"
                   : what),
        seed_(seed) {}

  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

 private:
  std::optional<std::uint64_t> seed_;
};

/// A computed object violates an axiom it must satisfy (e.g. a CDF that
/// decreases).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace freelab
