#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "mpec/errors.hpp"
#include "mpec/implicit.hpp"
#include "mpec/instance_io.hpp"
#include "mpec/matrix_props.hpp"
#include "mpec/pipa.hpp"
#include "mpec/pipa_lcp.hpp"
#include "mpec/psqp.hpp"

namespace mpec::cli {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const std::vector<std::string> kAlgos = {"pipa", "pipa-lcp", "implicit", "psqp", "oracle"};

[[noreturn]] void unknown_key(const std::string& algo, const std::string& key) {
  throw Error(ErrorCode::InvalidArgument, "unknown " + algo + " parameter '" + key + "'");
}

double num(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, key + " must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw Error(ErrorCode::InvalidArgument, key + " must be an integer");
  return v.get<int>();
}

PipaParams pipa_params(const json& j) {
  PipaParams p;
  for (const auto& [key, v] : j.items()) {
    if (key == "sigma") p.sigma = num(v, key);
    else if (key == "p") p.p = num(v, key);
    else if (key == "c") p.c = num(v, key);
    else if (key == "alpha0") p.alpha0 = num(v, key);
    else if (key == "alpha_growth") p.alpha_growth = num(v, key);
    else if (key == "alpha_max") p.alpha_max = num(v, key);
    else if (key == "armijo_rho") p.armijo_rho = num(v, key);
    else if (key == "armijo_eta") p.armijo_eta = num(v, key);
    else if (key == "tol_phi") p.tol_phi = num(v, key);
    else if (key == "tol_stat") p.tol_stat = num(v, key);
    else if (key == "max_iters") p.max_iters = integer(v, key);
    else if (key == "max_backtracks") p.max_backtracks = integer(v, key);
    else if (key == "Qv") p.Qv = matrix_from_json(v, "Qv");
    else unknown_key("pipa", key);
  }
  return p;
}

ImplicitParams implicit_params(const json& j) {
  ImplicitParams p;
  for (const auto& [key, v] : j.items()) {
    if (key == "armijo_rho") p.armijo_rho = num(v, key);
    else if (key == "armijo_eta") p.armijo_eta = num(v, key);
    else if (key == "tol_stat") p.tol_stat = num(v, key);
    else if (key == "max_iters") p.max_iters = integer(v, key);
    else if (key == "max_backtracks") p.max_backtracks = integer(v, key);
    else if (key == "Q") p.Q = matrix_from_json(v, "Q");
    else unknown_key("implicit", key);
  }
  return p;
}

PsqpParams psqp_params(const json& j) {
  PsqpParams p;
  for (const auto& [key, v] : j.items()) {
    if (key == "tol_step") p.tol_step = num(v, key);
    else if (key == "tol_active") p.tol_active = num(v, key);
    else if (key == "max_iters") p.max_iters = integer(v, key);
    else if (key == "reference") p.reference = vector_from_json(v, "reference");
    else unknown_key("psqp", key);
  }
  return p;
}

const char* tol_key(const std::string& algo) {
  if (algo == "implicit") return "tol_stat";
  if (algo == "psqp") return "tol_step";
  return "tol_phi";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Parse plus semantic validation; issues go to err and yield kStall.
std::optional<MpecInstance> load_checked(const std::string& path, std::ostream& err, int& code) {
  MpecInstance inst = load_instance_unchecked(path);
  const auto issues = validate_instance(inst);
  if (!issues.empty()) {
    err << "error: " << path << " failed validation\n";
    for (const auto& s : issues) err << "  " << s << "\n";
    code = kStall;
    return std::nullopt;
  }
  return inst;
}

struct Options {
  std::string algo;
  std::string instance;
  std::vector<std::string> instances;
  std::string params;
  std::uint64_t seed = 0;
  std::string trace;
  std::string report;
  std::optional<int> max_iters;
  std::optional<double> tol;
  std::vector<double> x0;
};

json solver_params(const Options& o, const std::string& algo) {
  json p = o.params.empty() ? json::object() : read_json_file(o.params);
  if (!p.is_object()) throw Error(ErrorCode::InvalidArgument, "params file must hold a JSON object");
  if (o.max_iters) p["max_iters"] = *o.max_iters;
  if (o.tol) p[tol_key(algo)] = *o.tol;
  return p;
}

Vec start_point(const Options& o, const MpecInstance& inst) {
  if (o.x0.empty()) return default_x0(inst);
  if (static_cast<int>(o.x0.size()) != inst.n()) {
    throw Error(ErrorCode::InvalidArgument, "--x0 must have n entries");
  }
  Vec x = Eigen::Map<const Vec>(o.x0.data(), inst.n());
  if (inst.k() > 0 && (inst.G() * x - inst.a()).maxCoeff() > 1e-12 * (1.0 + inst.a().cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "--x0 is outside X; interior methods need x0 in X");
  }
  return x;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto inst = load_checked(o.instance, err, code);
  if (!inst) return code;
  const Vec x0 = start_point(o, *inst);
  if (o.algo == "oracle") {
    const std::string text = oracle_to_json(enumerate_global(*inst)).dump(2) + "\n";
    if (!o.report.empty()) write_file(o.report, text);
    out << text;
    return kOk;
  }
  const json params = solver_params(o, o.algo);
  const SolveReport rep = run_solver(o.algo, *inst, x0, params);
  if (!o.trace.empty()) write_file(o.trace, trace_to_jsonl(rep.trace));
  const std::string text = report_to_json(rep).dump(2) + "\n";
  if (!o.report.empty()) write_file(o.report, text);
  out << text;
  return rep.converged() ? kOk : kStall;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  std::ostringstream csv;
  csv << "instance,algo,status,iters,final_value,value_gap,phi,wall_ms\n";
  int worst = kOk;
  for (const std::string& path : o.instances) {
    int code = kOk;
    auto inst = load_checked(path, err, code);
    if (!inst) {
      worst = std::max(worst, code);
      continue;
    }
    if (!inst->is_lcp_form()) {
      err << "error: " << path << " is not in LCP form; compare needs all four solvers\n";
      worst = kError;
      continue;
    }
    const Vec x0 = default_x0(*inst);
    double best = std::nan("");
    {
      const auto t0 = std::chrono::steady_clock::now();
      std::string status = "converged";
      int pieces = 0;
      try {
        const GlobalResult g = enumerate_global(*inst);
        best = g.best.value;
        pieces = static_cast<int>(g.all.size());
        if (g.approximate) status = "approximate";
      } catch (const Error& e) {
        status = std::string("error: ") + to_string(e.code());
      }
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      csv << path << ",oracle," << status << "," << pieces << "," << fmt(best) << ",0,0," << fmt(ms) << "\n";
    }
    for (const std::string algo : {"pipa", "pipa-lcp", "implicit", "psqp"}) {
      const auto t0 = std::chrono::steady_clock::now();
      std::string status;
      int iters = 0;
      double value = std::nan(""), phi_v = std::nan("");
      try {
        const SolveReport rep = run_solver(algo, *inst, x0, solver_params(o, algo));
        status = to_string(rep.status);
        iters = rep.iterations;
        value = rep.feasible_value ? *rep.feasible_value : rep.final_value;
        phi_v = rep.final_phi;
      } catch (const std::exception& e) {
        status = "error";
        err << "warning: " << algo << " on " << path << ": " << e.what() << "\n";
      }
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      csv << path << "," << algo << "," << status << "," << iters << "," << fmt(value) << ","
          << fmt(value - best) << "," << fmt(phi_v) << "," << fmt(ms) << "\n";
    }
  }
  if (!o.report.empty()) write_file(o.report, csv.str());
  out << csv.str();
  return worst;
}

int cmd_check(const Options& o, std::ostream& out) {
  const MpecInstance inst = load_instance_unchecked(o.instance);
  const auto issues = validate_instance(inst);
  const int m = inst.m();
  Mat DFy, DFw, DFz;
  if (inst.is_lcp_form()) {
    DFy = inst.M();
    DFw = -Mat::Identity(m, m);
    DFz = Mat::Zero(m, 0);
  } else {
    const Mat& J = inst.jacobian();
    DFy = J.middleCols(inst.n(), m);
    DFw = J.middleCols(inst.n() + m, m);
    DFz = J.rightCols(inst.l());
  }
  ojson j;
  j["instance"] = o.instance;
  j["form"] = inst.is_lcp_form() ? "lcp" : "general";
  j["valid"] = issues.empty();
  j["issues"] = issues;
  if (inst.l() == 0 && m <= 20) {
    j["w_property"] = has_w_property(MatrixPair{DFy, -DFw});
    j["lh_homeomorphism"] = lh_star_is_homeomorphism(DFy, DFw);
  } else {
    j["w_property"] = nullptr;
    j["lh_homeomorphism"] = nullptr;
  }
  if (m <= 20) {
    const PartitionedMatrix Q{DFy, DFw, DFz};
    j["mixed_p_necessary"] = mixed_p_necessary(Q);
    j["mixed_p_counterexample"] = mixed_p_falsify(Q, 1000, o.seed).has_value();
  }
  const std::string text = j.dump(2) + "\n";
  if (!o.report.empty()) write_file(o.report, text);
  out << text;
  return issues.empty() ? kOk : kStall;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto inst = load_checked(o.instance, err, code);
  if (!inst) return code;
  const std::string text = oracle_to_json(enumerate_global(*inst)).dump(2) + "\n";
  if (!o.report.empty()) write_file(o.report, text);
  out << text;
  return kOk;
}

}  // namespace

Vec default_x0(const MpecInstance& inst) {
  return project_onto_upper_set(inst, Vec::Zero(inst.n()));
}

SolveReport run_solver(const std::string& algo, const MpecInstance& inst, const Vec& x0,
                       const json& params) {
  if (algo == "pipa") {
    return pipa_solve(inst, Iterate::interior_start(inst, x0), pipa_params(params));
  }
  if (algo == "pipa-lcp") {
    return lcp_pipa_solve(inst, Iterate::interior_start(inst, x0), pipa_params(params));
  }
  if (algo == "implicit") return implicit_solve(inst, x0, implicit_params(params));
  if (algo == "psqp") {
    const KktMpecInstance kkt = kkt_from_lcp(inst);
    const LowerSolution sol = lower_solve(inst, x0);
    return psqp_solve(kkt, KktPoint{x0, sol.y, sol.w}, psqp_params(params));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + algo + "'");
}

ojson oracle_to_json(const GlobalResult& g) {
  ojson j;
  j["best_value"] = g.best.value;
  j["best_point"] = ojson{{"x", vec_json(g.best.point.x)},
                          {"y", vec_json(g.best.point.y)},
                          {"w", vec_json(g.best.point.w)},
                          {"z", vec_json(g.best.point.z)}};
  j["pattern"] = g.best.indices;
  j["approximate_flag"] = g.approximate;
  j["feasible_pieces"] = g.all.size();
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solvers for quadratic-affine MPECs"};
  app.name("mpec_cli");
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand(
      "solve",
      "Run one solver. Default start: x = 0 projected onto X; interior methods add y = w = e "
      "(z = 0); psqp starts on the lower-level solution at x0.");
  solve->add_option("--algo", o.algo, "pipa | pipa-lcp | implicit | psqp | oracle")
      ->required()
      ->check(CLI::IsMember(kAlgos));
  solve->add_option("--instance", o.instance, "instance JSON")->required();
  solve->add_option("--params", o.params, "JSON object of solver parameter overrides");
  solve->add_option("--seed", o.seed, "random seed");
  solve->add_option("--trace", o.trace, "JSONL trace output");
  solve->add_option("--report", o.report, "JSON report output");
  solve->add_option("--max-iters", o.max_iters, "iteration limit");
  solve->add_option("--tol", o.tol, "tol_phi (pipa), tol_stat (implicit) or tol_step (psqp)");
  solve->add_option("--x0", o.x0, "start x (must lie in X)");

  auto* compare = app.add_subcommand("compare", "Run every solver and the oracle; CSV table");
  compare->add_option("--instance", o.instances, "instance JSON files")->required();
  compare->add_option("--params", o.params, "JSON object of overrides shared by all solvers");
  compare->add_option("--seed", o.seed, "random seed");
  compare->add_option("--report", o.report, "CSV output");
  compare->add_option("--max-iters", o.max_iters, "iteration limit");

  auto* check = app.add_subcommand("check", "Validation and matrix property verdicts as JSON");
  check->add_option("--instance", o.instance, "instance JSON")->required();
  check->add_option("--seed", o.seed, "seed of the mixed P falsifier");
  check->add_option("--report", o.report, "JSON output");

  auto* oracle = app.add_subcommand("oracle", "Global minimum by piece enumeration");
  oracle->add_option("--instance", o.instance, "instance JSON")->required();
  oracle->add_option("--report", o.report, "JSON output");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "usage error: " << e.what() << "\n" << app.help();
    return kError;
  }

  try {
    if (*solve) return cmd_solve(o, out, err);
    if (*compare) return cmd_compare(o, out, err);
    if (*check) return cmd_check(o, out);
    return cmd_oracle(o, out, err);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace mpec::cli
