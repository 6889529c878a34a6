#pragma once

#include <stdexcept>
#include <string>

namespace segopt {

enum class ErrorKind {
  InvalidInstance,
  EmptySegmentation,
  NegativeH,
  CrossCheckFailure,
  DecompositionStall,
  Infeasible,
  NumericalStall,
  RegularityBreach,
  InvalidCutoffs,
  NotInPriceRegion,
  PreconditionViolated,
  SearchSpaceTooLarge,
  BudgetExceeded,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace segopt
