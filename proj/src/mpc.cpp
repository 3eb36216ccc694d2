#include "cvpm/mpc.hpp"

#include <string>

#include "cvpm/collision.hpp"
#include "cvpm/errors.hpp"
#include "cvpm/solver.hpp"

namespace cvpm {

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

// Adds {z : a' (T z + t) <= b} for every halfspace of P, where the polytope
// variable is the affine image T z + t of the decision vector z.
void add_affine_preimage(Polytope& out, const Polytope& P, const Matrix& T, const Vector& t) {
  for (const auto& h : P.halfspaces()) {
    Vector a = T.transpose() * h.normal;
    if (!(a.norm() > 1e-12)) {
      if (h.normal.dot(t) > h.offset + 1e-9) {
        // Constraint independent of z and violated: record an infeasible row.
        Vector e = Vector::Zero(T.cols());
        e(0) = 1.0;
        out.add(Halfspace(e, -1.0));
        out.add(Halfspace(-e, -1.0));
      }
      continue;
    }
    out.add(Halfspace(std::move(a), h.offset - h.normal.dot(t)));
  }
}

}  // namespace

bool TrackingReference::operator==(const TrackingReference& other) const {
  return same(offset, other.offset) && same(rate, other.rate);
}

void MpcConfig::validate(const LinearSystem& sys) const {
  const auto n = sys.state_dim();
  const auto m = sys.input_dim();
  if (N < 1) throw InvalidArgument("MpcConfig: horizon N must be at least 1");
  if (Q.rows() != n || Q.cols() != n) throw InvalidArgument("MpcConfig: Q must be n x n");
  if (R.rows() != m || R.cols() != m) throw InvalidArgument("MpcConfig: R must be m x m");
  if (P_f.rows() != n || P_f.cols() != n) throw InvalidArgument("MpcConfig: P_f must be n x n");
  if (input_set.dim() != m) throw InvalidArgument("MpcConfig: input_set dimension differs from m");
  if (state_set.dim() != n) throw InvalidArgument("MpcConfig: state_set dimension differs from n");
  if (terminal_set.dim() != n) throw InvalidArgument("MpcConfig: terminal_set dimension differs from n");
  if (reference.offset.size() != n || reference.rate.size() != n)
    throw InvalidArgument("MpcConfig: reference dimension differs from n");
  auto psd = [](const Matrix& S) {
    if (!S.isApprox(S.transpose(), 1e-12)) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    return es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, S.norm());
  };
  if (!psd(Q)) throw InvalidArgument("MpcConfig: Q must be symmetric positive semidefinite");
  if (!psd(P_f)) throw InvalidArgument("MpcConfig: P_f must be symmetric positive semidefinite");
  if (!R.isApprox(R.transpose(), 1e-12) || Eigen::LLT<Matrix>(R).info() != Eigen::Success)
    throw InvalidArgument("MpcConfig: R must be symmetric positive definite");
}

bool MpcConfig::operator==(const MpcConfig& other) const {
  return N == other.N && same(Q, other.Q) && same(R, other.R) && same(P_f, other.P_f) &&
         input_set == other.input_set && state_set == other.state_set && terminal_set == other.terminal_set &&
         reference == other.reference;
}

Polytope first_step_input_polytope(const LinearSystem& sys, const MpcConfig& cfg, const Vector& x0) {
  Polytope out = cfg.input_set;
  const Vector drift = sys.A() * x0;
  add_affine_preimage(out, cfg.state_set, sys.B(), drift);
  if (cfg.N == 1) add_affine_preimage(out, cfg.terminal_set, sys.B(), drift);
  return out;
}

ControlDecision solve_step(const LinearSystem& sys, const MpcConfig& cfg, const Vector& x0,
                           const ObstacleModel& obstacle, const Vector& y_r, long k, double c1) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate(sys);
  if (x0.size() != sys.state_dim()) throw InvalidArgument("solve_step: x0 has wrong dimension");

  const auto n = sys.state_dim();
  const auto m = sys.input_dim();
  const int N = cfg.N;
  const auto nv = m * N;
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();

  ViolationContext ctx{x0, nominal_next_obstacle(obstacle, y_r, k), c1, obstacle.w_max(k),
                       first_step_input_polytope(sys, cfg, x0)};
  if (is_empty(ctx.U_x0)) throw Infeasible("solve_step: first-step input set is empty at step " + std::to_string(k));
  const AdmissibleInputSet adm = compute_admissible_set(sys, ctx);

  // Prediction x_j = Phi_j x0 + Gamma_j U for j = 0..N.
  std::vector<Matrix> Gamma(static_cast<std::size_t>(N) + 1, Matrix::Zero(n, nv));
  std::vector<Vector> free_resp(static_cast<std::size_t>(N) + 1);
  free_resp[0] = x0;
  for (int j = 1; j <= N; ++j) {
    const auto J = static_cast<std::size_t>(j);
    Gamma[J] = A * Gamma[J - 1];
    Gamma[J].middleCols((j - 1) * m, m) += B;
    free_resp[J] = A * free_resp[J - 1];
  }

  // Reference inputs keep the reference trajectory consistent with the model.
  const Matrix B_pinv = B.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<Vector> x_ref(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) x_ref[static_cast<std::size_t>(j)] = cfg.reference.at(k + j);

  Matrix H = Matrix::Zero(nv, nv);
  Vector f = Vector::Zero(nv);
  double constant = 0.0;
  {
    const Vector e0 = x0 - x_ref[0];
    constant += e0.dot(cfg.Q * e0);
  }
  for (int j = 1; j <= N; ++j) {
    const auto J = static_cast<std::size_t>(j);
    const Matrix& W = j == N ? cfg.P_f : cfg.Q;
    const Vector e = free_resp[J] - x_ref[J];
    H += 2.0 * Gamma[J].transpose() * W * Gamma[J];
    f += 2.0 * Gamma[J].transpose() * W * e;
    constant += e.dot(W * e);
  }
  for (int j = 0; j < N; ++j) {
    const auto J = static_cast<std::size_t>(j);
    const Vector u_ref = B_pinv * (x_ref[J + 1] - A * x_ref[J]);
    H.block(j * m, j * m, m, m) += 2.0 * cfg.R;
    f.segment(j * m, m) -= 2.0 * cfg.R * u_ref;
    constant += u_ref.dot(cfg.R * u_ref);
  }
  H = 0.5 * (H + H.transpose());

  Polytope ineq(nv);
  for (int j = 0; j < N; ++j) {
    Matrix sel = Matrix::Zero(m, nv);
    sel.middleCols(j * m, m) = Matrix::Identity(m, m);
    add_affine_preimage(ineq, cfg.input_set, sel, Vector::Zero(m));
  }
  for (int j = 1; j <= N; ++j) {
    const auto J = static_cast<std::size_t>(j);
    add_affine_preimage(ineq, cfg.state_set, Gamma[J], free_resp[J]);
  }
  add_affine_preimage(ineq, cfg.terminal_set, Gamma[static_cast<std::size_t>(N)],
                      free_resp[static_cast<std::size_t>(N)]);

  Matrix eq_A(0, nv);
  Vector eq_b(0);
  if (const auto* single = std::get_if<Case2Singleton>(&adm.variant)) {
    eq_A = Matrix::Zero(m, nv);
    eq_A.leftCols(m) = Matrix::Identity(m, m);
    eq_b = single->u;
  } else if (const auto* restricted = std::get_if<Case3Restricted>(&adm.variant)) {
    Vector a = Vector::Zero(nv);
    a.head(m) = restricted->cut.normal;
    ineq.add(Halfspace(std::move(a), restricted->cut.offset));
  }

  const SolveReport rep = solve_qp(QuadraticProgram(H, f, std::move(ineq), eq_A, eq_b));
  if (rep.status == SolveStatus::kInfeasible)
    throw Infeasible("solve_step: QP infeasible at step " + std::to_string(k) + " (case " +
                     std::string(to_string(adm.label)) + ")");
  if (!rep.optimal())
    throw NumericalFailure("solve_step: QP " + std::string(to_string(rep.status)) + " at step " + std::to_string(k));

  ControlDecision dec;
  dec.u0 = rep.minimizer.head(m);
  dec.case_label = adm.label;
  dec.cost = rep.objective + constant;
  dec.h_min = adm.h_min;
  dec.h_max = adm.h_max;
  dec.threshold = adm.threshold;
  dec.predicted_distance = (sys.C() * sys.step(x0, dec.u0) - ctx.ybar_r1).norm();
  dec.predicted_violation_probability = collision_probability(c1, obstacle.density(k), dec.predicted_distance);
  dec.qp_iterations = rep.iterations;
  dec.solve_time = std::chrono::steady_clock::now() - t_start;
  return dec;
}

double riccati_residual(const LinearSystem& sys, const Matrix& Q, const Matrix& R, const Matrix& P) {
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const Matrix S = R + B.transpose() * P * B;
  const Matrix next = A.transpose() * P * A -
                      A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A) + Q;
  return (next - P).cwiseAbs().maxCoeff();
}

Matrix riccati_terminal_weight(const LinearSystem& sys, const Matrix& Q, const Matrix& R) {
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  if (Q.rows() != sys.state_dim() || Q.cols() != sys.state_dim() || R.rows() != sys.input_dim() ||
      R.cols() != sys.input_dim())
    throw InvalidArgument("riccati_terminal_weight: weight dimensions do not match the system");
  Matrix P = Q;
  for (int it = 0; it < 10000; ++it) {
    const Matrix S = R + B.transpose() * P * B;
    Matrix next = A.transpose() * P * A - A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A) + Q;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) break;
    const double diff = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (diff < 1e-10) return P;
  }
  throw NumericalFailure("riccati_terminal_weight: no convergence within 10000 iterations");
}

}  // namespace cvpm
