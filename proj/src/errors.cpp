#include "segopt/errors.hpp"

namespace segopt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInstance: return "InvalidInstance";
    case ErrorKind::EmptySegmentation: return "EmptySegmentation";
    case ErrorKind::NegativeH: return "NegativeH";
    case ErrorKind::CrossCheckFailure: return "CrossCheckFailure";
    case ErrorKind::DecompositionStall: return "DecompositionStall";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NumericalStall: return "NumericalStall";
    case ErrorKind::RegularityBreach: return "RegularityBreach";
    case ErrorKind::InvalidCutoffs: return "InvalidCutoffs";
    case ErrorKind::NotInPriceRegion: return "NotInPriceRegion";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

}  // namespace segopt
