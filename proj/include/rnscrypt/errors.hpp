#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rnscrypt {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic.
class UnderflowError : public Error { using Error::Error; };
class DivisionByZeroError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };

// RNS layer.
class NotEnoughPrimesError : public Error { using Error::Error; };
class BaseMismatchError : public Error { using Error::Error; };
class OverlappingBasesError : public Error { using Error::Error; };
class MissingRedundantResidueError : public Error { using Error::Error; };

// Montgomery contexts.
class EvenModulusError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class ContextMismatchError : public Error { using Error::Error; };

/// The modulus shares a factor with one of the fixed base primes.
class NotCoprimeError : public Error {
 public:
  NotCoprimeError(const std::string& what, std::uint64_t factor)
      : Error(what), factor_(factor) {}
  std::uint64_t factor() const noexcept { return factor_; }

 private:
  std::uint64_t factor_;
};

// Inversion.
class DivisionNotExactError : public Error { using Error::Error; };
class ZeroNotInvertibleError : public Error { using Error::Error; };

// Prime search.
class ExhaustionError : public Error { using Error::Error; };

// Random bit generation.
class SourceFailureError : public Error { using Error::Error; };
class InsufficientEntropyError : public Error { using Error::Error; };
class ReseedFailureError : public Error { using Error::Error; };
class WrongLengthError : public Error { using Error::Error; };
class SinkWriteError : public Error { using Error::Error; };

// RSA.
class InvalidExponentError : public Error { using Error::Error; };
class FrameError : public Error { using Error::Error; };
class RefusedError : public Error { using Error::Error; };
class KeyFormatError : public Error { using Error::Error; };

/// A channel task threw; `index` is the failing channel.
class ExecError : public Error {
 public:
  ExecError(std::size_t index, const std::string& what)
      : Error("channel " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// One or more block jobs failed. Every other block still ran to completion.
class BlockFailure : public Error {
 public:
  using Failure = std::pair<std::size_t, std::string>;

  explicit BlockFailure(std::vector<Failure> failures)
      : Error(describe(failures)), failures_(std::move(failures)) {}
  const std::vector<Failure>& failures() const noexcept { return failures_; }

 private:
  static std::string describe(const std::vector<Failure>& failures) {
    std::string msg = std::to_string(failures.size()) + " block(s) failed";
    if (!failures.empty()) {
      msg += "; first: block " + std::to_string(failures.front().first) + ": " +
             failures.front().second;
    }
    return msg;
  }

  std::vector<Failure> failures_;
};

}  // namespace rnscrypt
