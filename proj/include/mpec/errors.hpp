#pragma once

#include <stdexcept>
#include <string>

namespace mpec {

enum class ErrorCode {
  InvalidArgument,
  InvalidInstance,
  Io,
  NotComplementary,
  NegativeVariables,
  WrongForm,
  Degenerate,
  DimensionTooLarge,
  Singular,
  Infeasible,
  Unbounded,
  MaxIterations,
  NoSolution,
  SingularLowerBlock,
  LineSearchFailed,
  NoAdmissibleStep,
  IdentityViolated,
  NoBranchFeasible,
  InconsistentPiece,
  Diverged,
  NoFeasiblePiece,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int index = -1);

  ErrorCode code() const { return code_; }
  /// Offending component for NotComplementary, -1 otherwise.
  int index() const { return index_; }

 private:
  ErrorCode code_;
  int index_;
};

}  // namespace mpec
