#include "dissolve/linalg.hpp"

#include <cmath>

namespace dissolve {

namespace {

void require_symmetric(const Eigen::MatrixXd& s, const char* op) {
  if (s.rows() != s.cols())
    fail(ErrorCode::dimension_mismatch,
         std::string(op) + " expects a square matrix");
  const double scale = 1.0 + s.cwiseAbs().maxCoeff();
  const double skew = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-12 * scale)
    fail(ErrorCode::non_symmetric,
         std::string(op) + " input is not symmetric (max deviation " +
             std::to_string(skew) + ")");
}

}  // namespace

EighResult sym_eigh(const Eigen::MatrixXd& s) {
  require_symmetric(s, "sym_eigh");
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::no_convergence, "sym_eigh iteration did not converge");
  return EighResult{solver.eigenvalues(), solver.eigenvectors()};
}

Vector pinv_solve(const Eigen::MatrixXd& m, const Vector& b, double rtol) {
  require_symmetric(m, "pinv_solve");
  if (b.size() != m.rows())
    fail(ErrorCode::dimension_mismatch,
         "pinv_solve rhs length " + std::to_string(b.size()) +
             " does not match matrix order " + std::to_string(m.rows()));

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    Vector y = llt.solve(b);
    // Guard against a marginal factorization of a semidefinite matrix. The
    // residual is measured against the data only: scaling it by |y| would
    // bless the huge vectors such factorizations produce.
    const double resid = (m * y - b).norm();
    if (resid <= 1e-10 * (1.0 + b.norm())) return y;
  }

  const EighResult eig = sym_eigh(m);
  const double lambda_max = eig.eigenvalues.cwiseAbs().maxCoeff();
  const double cutoff = rtol * lambda_max;
  Vector y = Vector::Zero(m.rows());
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double lambda = eig.eigenvalues[i];
    if (lambda <= cutoff) continue;
    const Eigen::VectorXd v = eig.eigenvectors.col(i);
    y += (v.dot(b) / lambda) * v;
  }
  return y;
}

Vector tridiag_solve(const Vector& diag, const Vector& off, const Vector& b) {
  const Index n = diag.size();
  if (off.size() != n - 1 || b.size() != n)
    fail(ErrorCode::dimension_mismatch,
         "tridiag_solve band/rhs lengths do not match the diagonal");
  const double scale =
      diag.cwiseAbs().maxCoeff() + (n > 1 ? off.cwiseAbs().maxCoeff() : 0.0);

  Vector c(n), d(n);
  double piv = diag[0];
  if (std::abs(piv) <= 1e-14 * scale)
    fail(ErrorCode::singular_pivot, "tridiag_solve pivot 0 vanished");
  c[0] = (n > 1 ? off[0] / piv : 0.0);
  d[0] = b[0] / piv;
  for (Index i = 1; i < n; ++i) {
    piv = diag[i] - off[i - 1] * c[i - 1];
    if (std::abs(piv) <= 1e-14 * scale)
      fail(ErrorCode::singular_pivot,
           "tridiag_solve pivot " + std::to_string(i) + " vanished");
    c[i] = (i + 1 < n ? off[i] / piv : 0.0);
    d[i] = (b[i] - off[i - 1] * d[i - 1]) / piv;
  }
  for (Index i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
  return d;
}

}  // namespace dissolve
