#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chemclip {

enum class ErrorCode {
  kUnbalancedParenthesis,
  kUnclosedRingBond,
  kUnknownElement,
  kDanglingBondSymbol,
  kInvalidSmiles,
  kUnknownMetal,
  kMissingColumn,
  kMalformedRow,
  kMissingInput,
  kDimensionMismatch,
  kFormatError,
  kUnsupportedVersion,
  kEmptyGroup,
  kUndefined,
  kPerplexityTooLarge,
  kInvalidArgument,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Base exception for every failure raised by the library. The code lets
// callers (the CLI in particular) map failures onto exit statuses without
// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// SMILES failures carry the byte offset of the offending character.
class SmilesError : public Error {
 public:
  SmilesError(ErrorCode code, std::size_t offset, const std::string& message)
      : Error(code, message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Row-level CSV failures carry the 1-based line number.
class RowError : public Error {
 public:
  RowError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace chemclip
