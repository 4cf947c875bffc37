#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpec/model.hpp"
#include "mpec/oracle.hpp"
#include "mpec/report.hpp"

namespace mpec::cli {

enum Exit : int { kOk = 0, kError = 1, kStall = 2 };

/// Runs one command; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Default start for every algorithm: x = 0 projected onto X.
Vec default_x0(const MpecInstance& inst);

/// Runs the named solver with parameter overrides from `params` (JSON object
/// keyed by the solver's parameter names). Throws on unknown algorithms or keys.
SolveReport run_solver(const std::string& algo, const MpecInstance& inst, const Vec& x0,
                       const nlohmann::json& params);

nlohmann::ordered_json oracle_to_json(const GlobalResult& g);

}  // namespace mpec::cli
