#include "mpec/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "mpec/errors.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

namespace {

void fill_matrix(Mat& A, int rows, int cols, const char* name) {
  if (A.size() == 0) {
    A = Mat::Zero(rows, cols);
    return;
  }
  if (A.rows() != rows || A.cols() != cols) {
    std::ostringstream os;
    os << name << " has shape " << A.rows() << "x" << A.cols() << ", expected " << rows << "x"
       << cols;
    throw Error(ErrorCode::InvalidInstance, os.str());
  }
}

void fill_vector(Vec& v, int size, const char* name) {
  if (v.size() == 0) {
    v = Vec::Zero(size);
    return;
  }
  if (v.size() != size) {
    std::ostringstream os;
    os << name << " has length " << v.size() << ", expected " << size;
    throw Error(ErrorCode::InvalidInstance, os.str());
  }
}

bool all_finite(const Mat& A) { return A.size() == 0 || A.allFinite(); }

void require_nonnegative(const Iterate& it) {
  const double ymin = it.y.size() ? it.y.minCoeff() : 0.0;
  const double wmin = it.w.size() ? it.w.minCoeff() : 0.0;
  if (ymin < 0.0 || wmin < 0.0) {
    throw Error(ErrorCode::NegativeVariables, "y and w must be nonnegative");
  }
}

void check_iterate(const MpecInstance& inst, const Iterate& it) {
  if (it.x.size() != inst.n() || it.y.size() != inst.m() || it.w.size() != inst.m() ||
      it.z.size() != inst.l()) {
    throw Error(ErrorCode::InvalidArgument, "iterate dimensions do not match the instance");
  }
}

}  // namespace

MpecInstance::MpecInstance(MpecData data) : data_(std::move(data)) {
  auto& d = data_;
  if (d.n < 0 || d.m < 0 || d.l < 0) {
    throw Error(ErrorCode::InvalidInstance, "dimensions must be nonnegative");
  }
  const int n = d.n, m = d.m, l = d.l;
  fill_matrix(d.Hxx, n, n, "Hxx");
  fill_matrix(d.Hxy, n, m, "Hxy");
  fill_matrix(d.Hyy, m, m, "Hyy");
  fill_matrix(d.Hxw, n, m, "Hxw");
  fill_matrix(d.Hww, m, m, "Hww");
  fill_vector(d.cx, n, "cx");
  fill_vector(d.cy, m, "cy");
  fill_vector(d.cw, m, "cw");
  fill_vector(d.cz, l, "cz");

  if (d.lcp_form) {
    if (l != 0) throw Error(ErrorCode::InvalidInstance, "LCP form requires l = 0");
    fill_vector(d.q, m, "q");
    fill_matrix(d.N, m, n, "N");
    fill_matrix(d.M, m, m, "M");
  } else {
    fill_matrix(d.Ax, m + l, n, "Ax");
    fill_matrix(d.Ay, m + l, m, "Ay");
    fill_matrix(d.Aw, m + l, m, "Aw");
    fill_matrix(d.Az, m + l, l, "Az");
    fill_vector(d.b, m + l, "b");
  }

  if (d.G.size() == 0 && d.a.size() == 0) {
    d.G = Mat::Zero(0, n);
    d.a = Vec::Zero(0);
  } else {
    if (d.G.cols() != n || d.G.rows() != d.a.size()) {
      throw Error(ErrorCode::InvalidInstance, "G must be k x n with a of length k");
    }
  }

  for (const Mat* A : {&d.Hxx, &d.Hxy, &d.Hyy, &d.Hxw, &d.Hww, &d.N, &d.M, &d.Ax, &d.Ay, &d.Aw,
                       &d.Az, &d.G}) {
    if (!all_finite(*A)) throw Error(ErrorCode::InvalidInstance, "non-finite matrix entry");
  }
  for (const Vec* v : {&d.cx, &d.cy, &d.cw, &d.cz, &d.q, &d.b, &d.a}) {
    if (!all_finite(*v)) throw Error(ErrorCode::InvalidInstance, "non-finite vector entry");
  }
  if (!std::isfinite(d.c0)) throw Error(ErrorCode::InvalidInstance, "non-finite c0");

  const int N = dim();
  const int ox = 0, oy = n, ow = n + m, oz = n + 2 * m;
  hessian_ = Mat::Zero(N, N);
  hessian_.block(ox, ox, n, n) = 0.5 * (d.Hxx + d.Hxx.transpose());
  hessian_.block(ox, oy, n, m) = d.Hxy;
  hessian_.block(oy, ox, m, n) = d.Hxy.transpose();
  hessian_.block(oy, oy, m, m) = 0.5 * (d.Hyy + d.Hyy.transpose());
  hessian_.block(ox, ow, n, m) = d.Hxw;
  hessian_.block(ow, ox, m, n) = d.Hxw.transpose();
  hessian_.block(ow, ow, m, m) = 0.5 * (d.Hww + d.Hww.transpose());

  linear_ = Vec::Zero(N);
  linear_.segment(ox, n) = d.cx;
  linear_.segment(oy, m) = d.cy;
  linear_.segment(ow, m) = d.cw;
  linear_.segment(oz, l) = d.cz;

  jacobian_ = Mat::Zero(m + l, N);
  if (d.lcp_form) {
    jacobian_.block(0, ox, m, n) = d.N;
    jacobian_.block(0, oy, m, m) = d.M;
    jacobian_.block(0, ow, m, m) = -Mat::Identity(m, m);
    offset_ = d.q;
  } else {
    jacobian_.block(0, ox, m + l, n) = d.Ax;
    jacobian_.block(0, oy, m + l, m) = d.Ay;
    jacobian_.block(0, ow, m + l, m) = d.Aw;
    jacobian_.block(0, oz, m + l, l) = d.Az;
    offset_ = d.b;
  }
}

const Vec& MpecInstance::q() const {
  if (!data_.lcp_form) throw Error(ErrorCode::WrongForm, "instance has no LCP block");
  return data_.q;
}
const Mat& MpecInstance::N() const {
  if (!data_.lcp_form) throw Error(ErrorCode::WrongForm, "instance has no LCP block");
  return data_.N;
}
const Mat& MpecInstance::M() const {
  if (!data_.lcp_form) throw Error(ErrorCode::WrongForm, "instance has no LCP block");
  return data_.M;
}

double Iterate::mu() const {
  if (y.size() == 0) return 0.0;
  return y.dot(w) / static_cast<double>(y.size());
}

Vec Iterate::stacked() const {
  Vec u(x.size() + y.size() + w.size() + z.size());
  u << x, y, w, z;
  return u;
}

Iterate Iterate::from_stacked(const MpecInstance& inst, const Vec& u) {
  if (u.size() != inst.dim()) {
    throw Error(ErrorCode::InvalidArgument, "stacked vector has wrong length");
  }
  const int n = inst.n(), m = inst.m(), l = inst.l();
  return Iterate{u.segment(0, n), u.segment(n, m), u.segment(n + m, m), u.segment(n + 2 * m, l)};
}

Iterate Iterate::interior_start(const MpecInstance& inst, const Vec& x) {
  if (x.size() != inst.n()) throw Error(ErrorCode::InvalidArgument, "x has wrong length");
  return Iterate{x, Vec::Ones(inst.m()), Vec::Ones(inst.m()), Vec::Zero(inst.l())};
}

double default_classification_tol(const Vec& y, const Vec& w) {
  double norm = 0.0;
  if (y.size()) norm = std::max(norm, y.cwiseAbs().maxCoeff());
  if (w.size()) norm = std::max(norm, w.cwiseAbs().maxCoeff());
  return 1e-8 * (1.0 + norm);
}

IndexSets index_sets(const Vec& y, const Vec& w, double tol) {
  if (y.size() != w.size()) throw Error(ErrorCode::InvalidArgument, "y and w differ in length");
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  IndexSets sets;
  sets.tol = tol;
  for (int i = 0; i < y.size(); ++i) {
    if (y(i) < -tol || w(i) < -tol) {
      throw Error(ErrorCode::NegativeVariables, "y or w below -tol", i);
    }
    const bool ypos = y(i) > tol;
    const bool wpos = w(i) > tol;
    if (ypos && wpos) {
      std::ostringstream os;
      os << "component " << i << " has y = " << y(i) << " and w = " << w(i);
      throw Error(ErrorCode::NotComplementary, os.str(), i);
    }
    if (ypos) {
      sets.alpha.push_back(i);
    } else if (wpos) {
      sets.gamma.push_back(i);
    } else {
      sets.beta.push_back(i);
    }
  }
  return sets;
}

bool strict_complementarity(const Vec& y, const Vec& w, double tol) {
  return index_sets(y, w, tol).beta.empty();
}

double objective_value(const MpecInstance& inst, const Iterate& it) {
  check_iterate(inst, it);
  const Vec u = it.stacked();
  return 0.5 * u.dot(inst.hessian() * u) + inst.linear().dot(u) + inst.data().c0;
}

Vec objective_gradient(const MpecInstance& inst, const Iterate& it) {
  check_iterate(inst, it);
  return inst.hessian() * it.stacked() + inst.linear();
}

Vec lower_residual(const MpecInstance& inst, const Iterate& it) {
  check_iterate(inst, it);
  return inst.jacobian() * it.stacked() + inst.offset();
}

double phi_general(const MpecInstance& inst, const Iterate& it) {
  require_nonnegative(it);
  return lower_residual(inst, it).squaredNorm() + it.y.dot(it.w);
}

double phi_lcp(const MpecInstance& inst, const Iterate& it) {
  if (!inst.is_lcp_form()) throw Error(ErrorCode::WrongForm, "phi_lcp needs an LCP-form instance");
  require_nonnegative(it);
  return it.y.dot(it.w) + lower_residual(inst, it).norm();
}

PhiKind default_phi_kind(const MpecInstance& inst) {
  return inst.is_lcp_form() ? PhiKind::Lcp : PhiKind::General;
}

double phi(const MpecInstance& inst, const Iterate& it, PhiKind kind) {
  return kind == PhiKind::Lcp ? phi_lcp(inst, it) : phi_general(inst, it);
}

double penalty_value(const MpecInstance& inst, const Iterate& it, double alpha) {
  return penalty_value(inst, it, alpha, default_phi_kind(inst));
}

double penalty_value(const MpecInstance& inst, const Iterate& it, double alpha, PhiKind kind) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "penalty alpha must be positive");
  return objective_value(inst, it) + alpha * phi(inst, it, kind);
}

namespace {

// Residual of the four gradient blocks, linear in (zeta, pi, xi).
Vec gradient_blocks(const MpecInstance& inst, const Iterate& it, const MultiplierSet& mult) {
  const int n = inst.n(), m = inst.m();
  Vec r = objective_gradient(inst, it) - inst.jacobian().transpose() * mult.pi;
  r.segment(0, n) += inst.G().transpose() * mult.zeta;
  r.segment(n, m) -= it.w.cwiseProduct(mult.xi);
  r.segment(n + m, m) -= it.y.cwiseProduct(mult.xi);
  return r;
}

void require_strict(const Iterate& it) {
  const IndexSets sets = index_sets(it.y, it.w, default_classification_tol(it.y, it.w));
  if (!sets.beta.empty()) {
    throw Error(ErrorCode::Degenerate, "degenerate set is nonempty", sets.beta.front());
  }
}

}  // namespace

double kkt_residual(const MpecInstance& inst, const Iterate& it, const MultiplierSet& mult) {
  check_iterate(inst, it);
  if (mult.zeta.size() != inst.k() || mult.pi.size() != inst.m() + inst.l() ||
      mult.xi.size() != inst.m()) {
    throw Error(ErrorCode::InvalidArgument, "multiplier dimensions do not match the instance");
  }
  require_strict(it);
  double res = 0.0;
  const Vec r = gradient_blocks(inst, it, mult);
  if (r.size()) res = r.cwiseAbs().maxCoeff();
  const Vec slack = inst.a() - inst.G() * it.x;
  for (int i = 0; i < inst.k(); ++i) {
    res = std::max(res, std::abs(mult.zeta(i) * slack(i)));
    res = std::max(res, -mult.zeta(i));
  }
  return res;
}

MultiplierEstimate estimate_multipliers(const MpecInstance& inst, const Iterate& it) {
  check_iterate(inst, it);
  require_strict(it);
  const int n = inst.n(), m = inst.m(), l = inst.l(), k = inst.k();
  const Vec slack = inst.a() - inst.G() * it.x;
  IndexList active;
  for (int i = 0; i < k; ++i) {
    if (slack(i) <= 1e-8 * (1.0 + std::abs(inst.a()(i)))) active.push_back(i);
  }
  const int ka = static_cast<int>(active.size());
  const int nv = ka + (m + l) + m;

  // residual = g + B v, v = (zeta_active, pi, xi)
  const Vec g = objective_gradient(inst, it);
  Mat B = Mat::Zero(inst.dim(), nv);
  for (int j = 0; j < ka; ++j) B.block(0, j, n, 1) = inst.G().row(active[j]).transpose();
  B.block(0, ka, inst.dim(), m + l) = -inst.jacobian().transpose();
  for (int i = 0; i < m; ++i) {
    B(n + i, ka + m + l + i) = -it.w(i);
    B(n + m + i, ka + m + l + i) = -it.y(i);
  }

  // least squares via the normal equations
  QpProblem qp = QpProblem::zeros(nv);
  qp.Q = B.transpose() * B;
  qp.c = B.transpose() * g;
  qp.A = Mat::Zero(ka, nv);
  qp.A.block(0, 0, ka, ka) = -Mat::Identity(ka, ka);
  qp.b = Vec::Zero(ka);
  Vec v;
  try {
    v = solve_qp(qp).d;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unbounded) throw;
    // rank-deficient B: flat directions read as unbounded, so add a small ridge
    const double ridge = 1e-9 * (1.0 + (qp.Q.size() ? qp.Q.cwiseAbs().maxCoeff() : 0.0));
    qp.Q += ridge * Mat::Identity(nv, nv);
    v = solve_qp(qp).d;
  }

  MultiplierEstimate est;
  est.multipliers.zeta = Vec::Zero(k);
  for (int j = 0; j < ka; ++j) est.multipliers.zeta(active[j]) = std::max(0.0, v(j));
  est.multipliers.pi = v.segment(ka, m + l);
  est.multipliers.xi = v.segment(ka + m + l, m);
  est.residual = kkt_residual(inst, it, est.multipliers);
  return est;
}

Iterate complementary_rounding(const Iterate& it, IndexSets* sets) {
  Iterate out = it;
  const int m = static_cast<int>(it.y.size());
  double max_product = 0.0;
  for (int i = 0; i < m; ++i) max_product = std::max(max_product, it.y(i) * it.w(i));
  const double tol =
      std::max(default_classification_tol(it.y, it.w), 10.0 * std::sqrt(max_product));
  IndexSets s;
  s.tol = tol;
  for (int i = 0; i < m; ++i) {
    const double yi = std::max(0.0, it.y(i));
    const double wi = std::max(0.0, it.w(i));
    if (yi <= tol && wi <= tol) {
      out.y(i) = 0.0;
      out.w(i) = 0.0;
      s.beta.push_back(i);
    } else if (yi >= wi) {
      out.y(i) = yi;
      out.w(i) = 0.0;
      s.alpha.push_back(i);
    } else {
      out.y(i) = 0.0;
      out.w(i) = wi;
      s.gamma.push_back(i);
    }
  }
  if (sets) *sets = s;
  return out;
}

double b_stationarity_residual(const MpecInstance& inst, const Iterate& it) {
  check_iterate(inst, it);
  IndexSets sets;
  const Iterate p = complementary_rounding(it, &sets);
  const int n = inst.n(), m = inst.m(), N = inst.dim();
  const int nb = static_cast<int>(sets.beta.size());
  if (nb > 16) throw Error(ErrorCode::DimensionTooLarge, "degenerate set larger than 16");

  const Vec g = objective_gradient(inst, p);
  const Vec slack = (inst.a() - inst.G() * p.x).cwiseMax(0.0);
  const int rows_fixed = m;  // one fixed component per pair
  double worst = 0.0;
  for (Mask S = 0; S < (Mask(1) << nb); ++S) {
    QpProblem qp = QpProblem::zeros(N);
    qp.Q = Mat::Identity(N, N);
    qp.c = g;
    qp.E = Mat::Zero(inst.m() + inst.l() + rows_fixed, N);
    qp.e = Vec::Zero(qp.E.rows());
    qp.E.topRows(inst.m() + inst.l()) = inst.jacobian();
    int row = inst.m() + inst.l();
    std::vector<int> ineq_y, ineq_w;
    std::vector<bool> yside(m, false);
    for (int i : sets.alpha) yside[i] = true;
    for (int j = 0; j < nb; ++j) {
      if (S & (Mask(1) << j)) {
        yside[sets.beta[j]] = true;
        ineq_y.push_back(sets.beta[j]);
      } else {
        ineq_w.push_back(sets.beta[j]);
      }
    }
    for (int i = 0; i < m; ++i) {
      // y-side pieces fix w, the others fix y
      qp.E(row++, yside[i] ? n + m + i : n + i) = 1.0;
    }
    const int ni = inst.k() + static_cast<int>(ineq_y.size() + ineq_w.size());
    qp.A = Mat::Zero(ni, N);
    qp.b = Vec::Zero(ni);
    qp.A.block(0, 0, inst.k(), n) = inst.G();
    qp.b.head(inst.k()) = slack;
    int r = inst.k();
    for (int i : ineq_y) qp.A(r++, n + i) = -1.0;
    for (int i : ineq_w) qp.A(r++, n + m + i) = -1.0;
    const QpSolution sol = solve_qp(qp);
    worst = std::max(worst, sol.d.norm());
  }
  return worst;
}

Vec project_onto_upper_set(const MpecInstance& inst, const Vec& x) {
  if (x.size() != inst.n()) throw Error(ErrorCode::InvalidArgument, "x has wrong length");
  if (inst.k() == 0) return x;
  if ((inst.G() * x - inst.a()).maxCoeff() <= 0.0) return x;
  QpProblem qp = QpProblem::zeros(inst.n());
  qp.Q = Mat::Identity(inst.n(), inst.n());
  qp.c = -x;
  qp.A = inst.G();
  qp.b = inst.a();
  return solve_qp(qp).d;
}

std::vector<std::string> validate_instance(const MpecInstance& inst) {
  std::vector<std::string> issues;
  const auto& d = inst.data();
  auto check_symmetric = [&](const Mat& H, const char* name) {
    if (H.size() == 0) return;
    const double scale = 1.0 + H.cwiseAbs().maxCoeff();
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      issues.push_back(std::string(name) + " is not symmetric");
    }
  };
  check_symmetric(d.Hxx, "Hxx");
  check_symmetric(d.Hyy, "Hyy");
  check_symmetric(d.Hww, "Hww");

  if (inst.is_lcp_form() && inst.m() > 0) {
    const Mat S = 0.5 * (d.M + d.M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-10) {
      std::ostringstream os;
      os << "M is not positive semidefinite (smallest eigenvalue of the symmetric part " << lmin
         << ")";
      issues.push_back(os.str());
    }
  }

  if (inst.k() > 0) {
    try {
      project_onto_upper_set(inst, Vec::Zero(inst.n()));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Infeasible) {
        issues.push_back("upper-level set X = {x : Gx <= a} is empty");
      } else {
        issues.push_back(std::string("feasibility check of X failed: ") + e.what());
      }
    }
  }
  return issues;
}

}  // namespace mpec
