#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mpec/model.hpp"

namespace mpec {

enum class SolveStatus {
  Converged,
  MaxIterations,
  LineSearchFailed,
  NonstationaryStall,  // step vanished while the stationarity residual stayed large
  PieceStationary,     // stationary on the selected piece only
  Diverged,
  NoAdmissibleStep,
  Failed,
};

const char* to_string(SolveStatus s);

/// One trace line. Base fields are always written; the optional ones only
/// by the solver that owns them.
struct TraceRow {
  int iter = 0;
  double phi = 0.0;
  double P_alpha = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  double norm_dx = 0.0;
  std::string status;

  std::optional<double> tau_max;
  std::optional<std::string> binding_condition;

  std::optional<double> subproblem_value;
  std::optional<int> beta_size;
  std::optional<int> lower_solves;

  std::optional<IndexList> piece_J2;
  std::optional<double> step_norm;
  std::optional<double> ratio;
};

struct SolveReport {
  std::string algo;
  SolveStatus status = SolveStatus::Failed;
  std::string message;
  int iterations = 0;
  std::vector<TraceRow> trace;

  /// For the KKT-form solver, w holds the multiplier lambda.
  Iterate final_point;
  double final_phi = 0.0;
  double final_value = 0.0;
  /// f at (x, y(x), w(x)) with the lower level solved exactly (LCP form only).
  std::optional<double> feasible_value;
  double stationarity_residual = 0.0;

  double final_alpha = 0.0;
  std::string penalty_branch;  // "bounded" or "unbounded"; empty for penalty-free solvers
  IndexList penalty_updates;   // iterations at which alpha grew

  int lower_solves = 0;
  bool terminal_degenerate = false;
  std::vector<double> ratios;
  std::vector<IndexList> pieces;

  bool converged() const { return status == SolveStatus::Converged; }
};

nlohmann::ordered_json trace_row_to_json(const TraceRow& row);
std::string trace_to_jsonl(const std::vector<TraceRow>& trace);
nlohmann::ordered_json report_to_json(const SolveReport& report);

/// f(x, y(x), w(x)) for LCP-form instances; std::nullopt otherwise or when the
/// lower level has no solution.
std::optional<double> feasible_objective(const MpecInstance& inst, const Vec& x);

}  // namespace mpec
