#include "mpec/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "mpec/errors.hpp"

namespace mpec {

using nlohmann::json;

json matrix_to_json(const Mat& A) {
  json rows = json::array();
  for (int i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat matrix_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInstance, std::string(name) + " must be an array");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Mat(0, 0);
  if (!j[0].is_array()) {
    throw Error(ErrorCode::InvalidInstance, std::string(name) + " must be an array of rows");
  }
  const int cols = static_cast<int>(j[0].size());
  Mat A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols) {
      throw Error(ErrorCode::InvalidInstance, std::string(name) + " has ragged rows");
    }
    for (int c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw Error(ErrorCode::InvalidInstance, std::string(name) + " has a non-numeric entry");
      }
      A(i, c) = j[i][c].get<double>();
    }
  }
  return A;
}

Vec vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInstance, std::string(name) + " must be an array");
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorCode::InvalidInstance, std::string(name) + " has a non-numeric entry");
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

namespace {

int read_dim(const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw Error(ErrorCode::InvalidInstance, std::string("missing field ") + key);
    return 0;
  }
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
    throw Error(ErrorCode::InvalidInstance, std::string(key) + " must be a nonnegative integer");
  }
  return j[key].get<int>();
}

void read_mat(const json& obj, const char* key, Mat& out) {
  if (obj.contains(key)) out = matrix_from_json(obj[key], key);
}

void read_vec(const json& obj, const char* key, Vec& out) {
  if (obj.contains(key)) out = vector_from_json(obj[key], key);
}

}  // namespace

MpecInstance parse_instance(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInstance, "instance must be a JSON object");
  MpecData d;
  d.n = read_dim(j, "n", true);
  d.m = read_dim(j, "m", true);
  d.l = read_dim(j, "l", false);

  if (j.contains("objective")) {
    const json& o = j["objective"];
    if (!o.is_object()) throw Error(ErrorCode::InvalidInstance, "objective must be an object");
    read_mat(o, "Hxx", d.Hxx);
    read_mat(o, "Hxy", d.Hxy);
    read_mat(o, "Hyy", d.Hyy);
    read_mat(o, "Hxw", d.Hxw);
    read_mat(o, "Hww", d.Hww);
    read_vec(o, "cx", d.cx);
    read_vec(o, "cy", d.cy);
    read_vec(o, "cw", d.cw);
    read_vec(o, "cz", d.cz);
    if (o.contains("c0")) {
      if (!o["c0"].is_number()) throw Error(ErrorCode::InvalidInstance, "c0 must be a number");
      d.c0 = o["c0"].get<double>();
    }
  }

  d.lcp_form = true;
  if (j.contains("lower")) {
    const json& lo = j["lower"];
    if (!lo.is_object()) throw Error(ErrorCode::InvalidInstance, "lower must be an object");
    const bool general = lo.contains("Ax") || lo.contains("Ay") || lo.contains("Aw") ||
                         lo.contains("Az") || lo.contains("b");
    const bool lcp = lo.contains("q") || lo.contains("N") || lo.contains("M");
    if (general && lcp) {
      throw Error(ErrorCode::InvalidInstance, "lower mixes LCP fields (q, N, M) and general fields");
    }
    d.lcp_form = !general;
    if (general) {
      read_mat(lo, "Ax", d.Ax);
      read_mat(lo, "Ay", d.Ay);
      read_mat(lo, "Aw", d.Aw);
      read_mat(lo, "Az", d.Az);
      read_vec(lo, "b", d.b);
    } else {
      read_vec(lo, "q", d.q);
      read_mat(lo, "N", d.N);
      read_mat(lo, "M", d.M);
    }
  }
  if (d.l > 0 && d.lcp_form) d.lcp_form = false;

  if (j.contains("upper")) {
    const json& up = j["upper"];
    if (!up.is_object()) throw Error(ErrorCode::InvalidInstance, "upper must be an object");
    read_mat(up, "G", d.G);
    read_vec(up, "a", d.a);
    if (d.G.rows() == 0 && d.a.size() == 0) d.G = Mat(0, 0);
  }
  return MpecInstance(std::move(d));
}

json instance_to_json(const MpecInstance& inst) {
  const MpecData& d = inst.data();
  json j = json::object();
  j["n"] = d.n;
  j["m"] = d.m;
  j["l"] = d.l;
  json o = json::object();
  o["Hxx"] = matrix_to_json(d.Hxx);
  o["Hxy"] = matrix_to_json(d.Hxy);
  o["Hyy"] = matrix_to_json(d.Hyy);
  o["Hxw"] = matrix_to_json(d.Hxw);
  o["Hww"] = matrix_to_json(d.Hww);
  o["cx"] = vector_to_json(d.cx);
  o["cy"] = vector_to_json(d.cy);
  o["cw"] = vector_to_json(d.cw);
  o["cz"] = vector_to_json(d.cz);
  o["c0"] = d.c0;
  j["objective"] = std::move(o);
  json lo = json::object();
  if (d.lcp_form) {
    lo["q"] = vector_to_json(d.q);
    lo["N"] = matrix_to_json(d.N);
    lo["M"] = matrix_to_json(d.M);
  } else {
    lo["Ax"] = matrix_to_json(d.Ax);
    lo["Ay"] = matrix_to_json(d.Ay);
    lo["Aw"] = matrix_to_json(d.Aw);
    lo["Az"] = matrix_to_json(d.Az);
    lo["b"] = vector_to_json(d.b);
  }
  j["lower"] = std::move(lo);
  j["upper"] = json{{"G", matrix_to_json(d.G)}, {"a", vector_to_json(d.a)}};
  return j;
}

MpecInstance load_instance_unchecked(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInstance, path + ": " + e.what());
  }
  return parse_instance(j);
}

MpecInstance load_instance(const std::string& path) {
  MpecInstance inst = load_instance_unchecked(path);
  const auto issues = validate_instance(inst);
  if (!issues.empty()) {
    std::ostringstream os;
    os << path << ":";
    for (const auto& s : issues) os << " " << s << ";";
    throw Error(ErrorCode::InvalidInstance, os.str());
  }
  return inst;
}

}  // namespace mpec
