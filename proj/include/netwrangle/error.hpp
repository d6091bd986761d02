#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nw {

enum class ErrorCode {
  NameCollision,
  UnknownAttribute,
  UnknownTable,
  UnknownClass,
  UnknownLink,
  CyclicDerivation,
  DanglingSource,
  WrongInterpretation,
  Unsupported,
  SideOccupied,
  NoOp,
  TooManyFacets,
  AmbiguousSides,
  NeedBothSides,
  InvalidPath,
  EmptyClass,
  SyntaxError,
  UnknownIdentifier,
  UnknownReducer,
  MalformedCsv,
  UnsupportedShape,
  InvalidItem,
  Validation,
  InvariantViolation,
  ExpectationFailed,
  StaleSequence,
  Io,
};

std::string_view toString(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nw
