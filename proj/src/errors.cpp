#include "mpec/errors.hpp"

#include "mpec/types.hpp"

namespace mpec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidInstance: return "InvalidInstance";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NotComplementary: return "NotComplementary";
    case ErrorCode::NegativeVariables: return "NegativeVariables";
    case ErrorCode::WrongForm: return "WrongForm";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::SingularLowerBlock: return "SingularLowerBlock";
    case ErrorCode::LineSearchFailed: return "LineSearchFailed";
    case ErrorCode::NoAdmissibleStep: return "NoAdmissibleStep";
    case ErrorCode::IdentityViolated: return "IdentityViolated";
    case ErrorCode::NoBranchFeasible: return "NoBranchFeasible";
    case ErrorCode::InconsistentPiece: return "InconsistentPiece";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::NoFeasiblePiece: return "NoFeasiblePiece";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, int index)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      index_(index) {}

IndexList mask_to_indices(Mask mask, int m) {
  IndexList out;
  for (int i = 0; i < m; ++i) {
    if (mask & (Mask{1} << i)) out.push_back(i);
  }
  return out;
}

bool lex_less(Mask a, Mask b, int m) {
  const IndexList ia = mask_to_indices(a, m);
  const IndexList ib = mask_to_indices(b, m);
  return ia < ib;
}

}  // namespace mpec
