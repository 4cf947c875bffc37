#include "mpec/report.hpp"

#include <sstream>

#include "mpec/errors.hpp"
#include "mpec/instance_io.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

using ojson = nlohmann::ordered_json;

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::LineSearchFailed: return "line_search_failed";
    case SolveStatus::NonstationaryStall: return "nonstationary_stall";
    case SolveStatus::PieceStationary: return "piece_stationary";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::NoAdmissibleStep: return "no_admissible_step";
    case SolveStatus::Failed: return "failed";
  }
  return "failed";
}

namespace {
ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}
ojson index_json(const IndexList& v) {
  ojson a = ojson::array();
  for (int i : v) a.push_back(i);
  return a;
}
}  // namespace

ojson trace_row_to_json(const TraceRow& row) {
  ojson j;
  j["iter"] = row.iter;
  j["phi"] = row.phi;
  j["P_alpha"] = row.P_alpha;
  j["alpha"] = row.alpha;
  j["mu"] = row.mu;
  j["tau"] = row.tau;
  j["norm_dx"] = row.norm_dx;
  j["status"] = row.status;
  if (row.tau_max) j["tau_max"] = *row.tau_max;
  if (row.binding_condition) j["binding_condition"] = *row.binding_condition;
  if (row.subproblem_value) j["subproblem_value"] = *row.subproblem_value;
  if (row.beta_size) j["beta_size"] = *row.beta_size;
  if (row.lower_solves) j["lower_solves"] = *row.lower_solves;
  if (row.piece_J2) j["piece_J2"] = index_json(*row.piece_J2);
  if (row.step_norm) j["step_norm"] = *row.step_norm;
  if (row.ratio) j["ratio"] = *row.ratio;
  return j;
}

std::string trace_to_jsonl(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  for (const auto& row : trace) os << trace_row_to_json(row).dump() << '\n';
  return os.str();
}

ojson report_to_json(const SolveReport& r) {
  ojson j;
  j["algo"] = r.algo;
  j["status"] = to_string(r.status);
  if (!r.message.empty()) j["message"] = r.message;
  j["iters"] = r.iterations;
  j["final_phi"] = r.final_phi;
  j["final_value"] = r.final_value;
  if (r.feasible_value) j["feasible_value"] = *r.feasible_value;
  j["stationarity_residual"] = r.stationarity_residual;
  j["final_point"] = ojson{{"x", vec_json(r.final_point.x)},
                           {"y", vec_json(r.final_point.y)},
                           {"w", vec_json(r.final_point.w)},
                           {"z", vec_json(r.final_point.z)}};
  if (!r.penalty_branch.empty()) {
    j["final_alpha"] = r.final_alpha;
    j["penalty_branch"] = r.penalty_branch;
    j["penalty_updates"] = index_json(r.penalty_updates);
  }
  if (r.lower_solves > 0) j["lower_solves"] = r.lower_solves;
  j["terminal_degenerate"] = r.terminal_degenerate;
  if (!r.ratios.empty()) {
    ojson a = ojson::array();
    for (double v : r.ratios) a.push_back(v);
    j["ratios"] = a;
  }
  if (!r.pieces.empty()) {
    ojson a = ojson::array();
    for (const auto& p : r.pieces) a.push_back(index_json(p));
    j["pieces"] = a;
  }
  return j;
}

std::optional<double> feasible_objective(const MpecInstance& inst, const Vec& x) {
  if (!inst.is_lcp_form()) return std::nullopt;
  try {
    const LcpSolution s = solve_lcp(inst.M(), inst.q() + inst.N() * x);
    return objective_value(inst, Iterate{x, s.y, s.w, Vec::Zero(0)});
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace mpec
