#include "cvpm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cvpm/errors.hpp"

namespace cvpm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Consecutive zero-length steps before switching to Bland's rule.
constexpr int kDegenerateStreakLimit = 8;

struct ActiveSetProblem {
  const Matrix& H;
  const Vector& f;
  const Matrix& A;  // inequality rows
  const Vector& b;
  const Matrix& E;  // equality rows
};

struct ActiveSetState {
  Vector x;
  std::vector<int> working;  // inequality indices, ascending
  SolveStatus status = SolveStatus::kNumericalFailure;
  int iterations = 0;
};

Matrix working_rows(const ActiveSetProblem& p, const std::vector<int>& working) {
  Matrix Aw(p.E.rows() + static_cast<Eigen::Index>(working.size()), p.A.cols());
  if (p.E.rows() > 0) Aw.topRows(p.E.rows()) = p.E;
  for (std::size_t k = 0; k < working.size(); ++k) Aw.row(p.E.rows() + static_cast<Eigen::Index>(k)) = p.A.row(working[k]);
  return Aw;
}

// Step inside the null space of the working rows. Returns false for a ray
// (direction of zero curvature and strict descent).
struct SubspaceStep {
  Vector p;
  bool ray = false;
  bool stationary = false;
};

SubspaceStep subspace_step(const Matrix& H, const Vector& g, const Matrix& Z, double grad_tol) {
  SubspaceStep out;
  const Eigen::Index n = g.size();
  if (Z.cols() == 0) {
    out.p = Vector::Zero(n);
    out.stationary = true;
    return out;
  }
  const Vector gz = Z.transpose() * g;
  if (gz.norm() <= grad_tol) {
    out.p = Vector::Zero(n);
    out.stationary = true;
    return out;
  }
  const Matrix Hz = Z.transpose() * H * Z;
  const double h_scale = std::max(1.0, Hz.cwiseAbs().maxCoeff());

  Eigen::LLT<Matrix> llt(Hz);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-11) {
    out.p = -(Z * llt.solve(gz));
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(Hz);
  const Vector& evals = eig.eigenvalues();
  const Matrix& V = eig.eigenvectors();
  const Vector coeff = V.transpose() * gz;
  const double zero_curv = 1e-10 * h_scale;
  Vector d_null = Vector::Zero(Hz.rows());
  Vector d_newton = Vector::Zero(Hz.rows());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) <= zero_curv) {
      d_null -= coeff(i) * V.col(i);
    } else {
      d_newton -= (coeff(i) / evals(i)) * V.col(i);
    }
  }
  if (d_null.norm() > grad_tol) {
    out.p = Z * d_null;
    out.ray = true;
  } else {
    out.p = Z * d_newton;
  }
  return out;
}

ActiveSetState run_active_set(const ActiveSetProblem& prob, Vector x, std::vector<int> working,
                              const SolverOptions& opts, int max_iterations) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = prob.A.rows();
  ActiveSetState st;
  int degenerate_streak = 0;

  Vector row_norms(m);
  for (Eigen::Index i = 0; i < m; ++i) row_norms(i) = prob.A.row(i).norm();

  for (int it = 0; it < max_iterations; ++it) {
    st.iterations = it + 1;
    const Vector g = prob.H * x + prob.f;
    const double g_scale = std::max(1.0, g.norm());
    const Matrix Aw = working_rows(prob, working);

    Matrix Z;
    Eigen::ColPivHouseholderQR<Matrix> qr;
    if (Aw.rows() == 0) {
      Z = Matrix::Identity(n, n);
    } else {
      qr.setThreshold(1e-12);
      qr.compute(Aw.transpose());
      const Eigen::Index rank = qr.rank();
      const Matrix Q = qr.householderQ();
      Z = Q.rightCols(n - rank);
    }

    SubspaceStep step = subspace_step(prob.H, g, Z, opts.optimality_tol * g_scale);
    if (!step.stationary && step.p.norm() <= 1e-14 * (1.0 + x.norm())) step.stationary = true;

    if (step.stationary) {
      if (working.empty()) {
        st.status = SolveStatus::kOptimal;
        break;
      }
      const Vector lambda = qr.solve(Vector(-g));
      const Eigen::Index off = prob.E.rows();
      const double lam_tol = opts.optimality_tol * g_scale;
      int drop = -1;
      double most_negative = -lam_tol;
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double lam = lambda(off + static_cast<Eigen::Index>(k));
        if (degenerate_streak >= kDegenerateStreakLimit) {
          // Bland: lowest constraint index with a negative multiplier.
          if (lam < -lam_tol) {
            drop = static_cast<int>(k);
            break;
          }
        } else if (lam < most_negative) {
          most_negative = lam;
          drop = static_cast<int>(k);
        }
      }
      if (drop < 0) {
        st.status = SolveStatus::kOptimal;
        break;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    // Ratio test over inactive constraints, lowest index wins ties.
    double alpha = step.ray ? kInf : 1.0;
    int block = -1;
    const double p_norm = step.p.norm();
    std::size_t w = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (w < working.size() && working[w] == i) {
        ++w;
        continue;
      }
      const double ap = prob.A.row(i).dot(step.p);
      if (ap <= 1e-12 * row_norms(i) * p_norm) continue;
      const double slack = std::max(0.0, prob.b(i) - prob.A.row(i).dot(x));
      const double a_i = slack / ap;
      if (a_i < alpha) {
        alpha = a_i;
        block = static_cast<int>(i);
      }
    }
    if (block < 0 && step.ray) {
      st.status = SolveStatus::kUnbounded;
      st.x = x;
      st.working = working;
      return st;
    }
    x += alpha * step.p;
    degenerate_streak = (alpha == 0.0) ? degenerate_streak + 1 : 0;
    if (block >= 0) working.insert(std::lower_bound(working.begin(), working.end(), block), block);
  }
  st.x = std::move(x);
  st.working = std::move(working);
  return st;
}

int default_iteration_cap(Eigen::Index n, Eigen::Index m, Eigen::Index p) {
  return static_cast<int>(50 * (n + m + p) + 200);
}

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

QuadraticProgram::QuadraticProgram(Matrix H_, Vector f_, Polytope ineq_)
    : QuadraticProgram(std::move(H_), std::move(f_), std::move(ineq_), Matrix(0, 0), Vector(0)) {}

QuadraticProgram::QuadraticProgram(Matrix H_, Vector f_, Polytope ineq_, Matrix eq_A_, Vector eq_b_)
    : H(std::move(H_)), f(std::move(f_)), ineq(std::move(ineq_)), eq_A(std::move(eq_A_)), eq_b(std::move(eq_b_)) {
  if (eq_A.rows() == 0) eq_A.resize(0, f.size());
}

void QuadraticProgram::validate() const {
  const auto d = f.size();
  if (H.rows() != d || H.cols() != d) throw InvalidArgument("QuadraticProgram: H must be d x d");
  if (ineq.dim() != d) throw InvalidArgument("QuadraticProgram: inequality polytope has wrong dimension");
  if (eq_A.cols() != d || eq_A.rows() != eq_b.size())
    throw InvalidArgument("QuadraticProgram: equality constraints have inconsistent sizes");
  if (d == 0) return;
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("QuadraticProgram: H is not symmetric");
  if (!H.isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
      throw InvalidArgument("QuadraticProgram: H is not positive semidefinite");
  }
}

SolveReport solve_qp(const QuadraticProgram& qp, const SolverOptions& options) {
  qp.validate();
  const Eigen::Index n = qp.dim();
  const Matrix A = qp.ineq.normals();
  const Vector b = qp.ineq.offsets();
  const Eigen::Index m = A.rows();
  const Eigen::Index p = qp.eq_A.rows();
  const int cap = options.max_iterations > 0 ? options.max_iterations : default_iteration_cap(n, m, p);

  SolveReport report;
  report.minimizer = Vector::Zero(n);

  // Starting point satisfying the equalities.
  Vector x0 = Vector::Zero(n);
  if (p > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(qp.eq_A);
    x0 = cod.solve(qp.eq_b);
    const double residual = (qp.eq_A * x0 - qp.eq_b).cwiseAbs().maxCoeff();
    if (residual > options.feasibility_tol * std::max(1.0, qp.eq_b.cwiseAbs().maxCoeff())) {
      report.status = SolveStatus::kInfeasible;
      return report;
    }
  }

  const double b_scale = m > 0 ? std::max(1.0, b.cwiseAbs().maxCoeff()) : 1.0;
  const double feas_tol = options.feasibility_tol * b_scale;
  double violation = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) violation = std::max(violation, A.row(i).dot(x0) - b(i));

  Vector x = x0;
  int iterations = 0;
  if (violation > feas_tol) {
    // Phase 1: min t  s.t.  A x - t <= b,  t >= -1,  E x = e.
    Matrix A1(m + 1, n + 1);
    A1.topLeftCorner(m, n) = A;
    A1.topRightCorner(m, 1).setConstant(-1.0);
    A1.bottomRows(1).setZero();
    A1(m, n) = -1.0;
    Vector b1(m + 1);
    b1.head(m) = b;
    b1(m) = 1.0;
    Matrix E1 = Matrix::Zero(p, n + 1);
    if (p > 0) E1.leftCols(n) = qp.eq_A;
    const Matrix H1 = Matrix::Zero(n + 1, n + 1);
    Vector f1 = Vector::Zero(n + 1);
    f1(n) = 1.0;
    Vector z0(n + 1);
    z0.head(n) = x0;
    z0(n) = violation;
    const ActiveSetProblem phase1{H1, f1, A1, b1, E1};
    const ActiveSetState s1 = run_active_set(phase1, z0, {}, options, default_iteration_cap(n + 1, m + 1, p));
    iterations += s1.iterations;
    if (s1.status != SolveStatus::kOptimal) {
      report.status = SolveStatus::kNumericalFailure;
      report.iterations = iterations;
      return report;
    }
    if (s1.x(n) > feas_tol) {
      report.status = SolveStatus::kInfeasible;
      report.minimizer = s1.x.head(n);
      report.iterations = iterations;
      return report;
    }
    x = s1.x.head(n);
  }

  const Matrix E = p > 0 ? qp.eq_A : Matrix(0, n);
  const ActiveSetProblem phase2{qp.H, qp.f, A, b, E};
  ActiveSetState s2 = run_active_set(phase2, x, {}, options, cap);
  iterations += s2.iterations;
  report.iterations = iterations;
  report.minimizer = s2.x;
  report.active_set = s2.working;
  report.status = s2.status;
  report.objective = 0.5 * s2.x.dot(qp.H * s2.x) + qp.f.dot(s2.x);
  return report;
}

KktResiduals kkt_residuals(const QuadraticProgram& qp, const SolveReport& report) {
  KktResiduals r;
  const Vector& x = report.minimizer;
  const Matrix A = qp.ineq.normals();
  const Vector b = qp.ineq.offsets();
  for (Eigen::Index i = 0; i < A.rows(); ++i) r.max_violation = std::max(r.max_violation, A.row(i).dot(x) - b(i));
  if (qp.eq_A.rows() > 0)
    r.max_violation = std::max(r.max_violation, (qp.eq_A * x - qp.eq_b).cwiseAbs().maxCoeff());

  const Vector g = qp.H * x + qp.f;
  const Eigen::Index p = qp.eq_A.rows();
  Matrix Aw(p + static_cast<Eigen::Index>(report.active_set.size()), x.size());
  if (p > 0) Aw.topRows(p) = qp.eq_A;
  for (std::size_t k = 0; k < report.active_set.size(); ++k)
    Aw.row(p + static_cast<Eigen::Index>(k)) = A.row(report.active_set[k]);
  if (Aw.rows() == 0) {
    r.stationarity = g.norm();
    return r;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Aw.transpose());
  const Vector lambda = cod.solve(Vector(-g));
  r.stationarity = (g + Aw.transpose() * lambda).norm();
  r.min_multiplier = lambda.size() > p ? lambda.tail(lambda.size() - p).minCoeff() : 0.0;
  return r;
}

NormExtremum min_norm_to_point(const Matrix& M, const Vector& b, const Polytope& P) {
  if (M.cols() != P.dim() || M.rows() != b.size()) throw InvalidArgument("min_norm_to_point: dimension mismatch");
  const Matrix H = 2.0 * M.transpose() * M;
  const Vector f = -2.0 * M.transpose() * b;
  const SolveReport rep = solve_qp(QuadraticProgram(H, f, P));
  if (rep.status == SolveStatus::kInfeasible) throw Infeasible("min_norm_to_point: polytope is empty");
  if (rep.status != SolveStatus::kOptimal)
    throw NumericalFailure(std::string("min_norm_to_point: solver returned ") + std::string(to_string(rep.status)));
  return {rep.minimizer, (M * rep.minimizer - b).norm()};
}

NormExtremum max_norm_over_vertices(const Matrix& M, const Vector& b, const std::vector<Vector>& vertices) {
  if (vertices.empty()) throw Infeasible("max_norm_to_point: polytope is empty");
  NormExtremum best{vertices.front(), (M * vertices.front() - b).norm()};
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const double v = (M * vertices[i] - b).norm();
    if (v > best.value) best = {vertices[i], v};
  }
  return best;
}

NormExtremum max_norm_to_point(const Matrix& M, const Vector& b, const Polytope& P) {
  if (M.cols() != P.dim() || M.rows() != b.size()) throw InvalidArgument("max_norm_to_point: dimension mismatch");
  return max_norm_over_vertices(M, b, enumerate_vertices(P));
}

}  // namespace cvpm
