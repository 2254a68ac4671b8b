#include "dissolve/manifolds.hpp"

#include <cmath>
#include <utility>

#include "dissolve/auto_manifold.hpp"
#include "dissolve/linalg.hpp"
#include "dissolve/product_manifold.hpp"

namespace dissolve {

namespace {

Vector flatten(const MatrixRM& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

void require_dims(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::invalid_dims, what);
}

// ---------------------------------------------------------------------------
// Sphere

class SphereManifold final : public ManifoldBase {
 public:
  explicit SphereManifold(Index n) : n_(n) {
    require_dims(n >= 1, "sphere needs ambient dimension >= 1");
  }

  std::string kind() const override { return "sphere"; }
  Shape shape() const override { return {n_, 1}; }
  Index constraint_dim() const override { return 1; }

  Vector constraint(const Point& x) const override {
    Vector c(1);
    c[0] = x.data.squaredNorm() - 1.0;
    return c;
  }

  Vector penalty_grad(const Point& x) const override {
    return 2.0 * (x.data.squaredNorm() - 1.0) * x.data;
  }

  Point cd_map(const Point& x) const override {
    return x.with_data(2.0 / (1.0 + x.data.squaredNorm()) * x.data);
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const double s = 1.0 + x.data.squaredNorm();
    return (2.0 / s) * w - (4.0 * x.data.dot(w) / (s * s)) * x.data;
  }

  Point init_point(Rng& rng) const override {
    Vector g = rng.gaussian_vector(n_);
    while (g.norm() < 1e-12) g = rng.gaussian_vector(n_);
    return Point(g / g.norm(), shape());
  }

  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point& x) const override {
    MatrixRM j(n_, 1);
    j.col(0) = 2.0 * x.data;
    return j;
  }

 private:
  Index n_;
};

// ---------------------------------------------------------------------------
// Oblique: every row lives on a sphere.

class ObliqueManifold final : public ManifoldBase {
 public:
  ObliqueManifold(Index rows, Index cols) : rows_(rows), cols_(cols) {
    require_dims(rows >= 1 && cols >= 1, "oblique needs rows, cols >= 1");
  }

  std::string kind() const override { return "oblique"; }
  Shape shape() const override { return {rows_, cols_}; }
  Index constraint_dim() const override { return rows_; }

  Vector constraint(const Point& x) const override {
    const auto xm = x.mat();
    Vector c(rows_);
    for (Index i = 0; i < rows_; ++i) c[i] = xm.row(i).squaredNorm() - 1.0;
    return c;
  }

  Vector penalty_grad(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM g(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      g.row(i) = 2.0 * (xm.row(i).squaredNorm() - 1.0) * xm.row(i);
    return flatten(g);
  }

  Point cd_map(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM a(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      a.row(i) = 2.0 / (1.0 + xm.row(i).squaredNorm()) * xm.row(i);
    return Point(flatten(a), shape());
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const auto xm = x.mat();
    const Eigen::Map<const MatrixRM> wm(w.data(), rows_, cols_);
    MatrixRM out(rows_, cols_);
    for (Index i = 0; i < rows_; ++i) {
      const double s = 1.0 + xm.row(i).squaredNorm();
      out.row(i) = (2.0 / s) * wm.row(i) -
                   (4.0 * xm.row(i).dot(wm.row(i)) / (s * s)) * xm.row(i);
    }
    return flatten(out);
  }

  Point init_point(Rng& rng) const override {
    MatrixRM g = rng.gaussian_matrix(rows_, cols_);
    for (Index i = 0; i < rows_; ++i) {
      while (g.row(i).norm() < 1e-12)
        g.row(i) = rng.gaussian_vector(cols_).transpose();
      g.row(i) /= g.row(i).norm();
    }
    return Point(flatten(g), shape());
  }

  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM j = MatrixRM::Zero(rows_ * cols_, rows_);
    for (Index i = 0; i < rows_; ++i)
      for (Index k = 0; k < cols_; ++k) j(i * cols_ + k, i) = 2.0 * xm(i, k);
    return j;
  }

 private:
  Index rows_, cols_;
};

// ---------------------------------------------------------------------------
// Stiefel family. The plain Stiefel map is A(X) = X(1.5 I - 0.5 X^T X) and
// its adjoint Jacobian action is
//   J_A(X) W = W(1.5 I - 0.5 X^T X) - 0.5 (X W^T X + X X^T W).

class StiefelManifold : public ManifoldBase {
 public:
  StiefelManifold(Index rows, Index cols, std::string kind = "stiefel")
      : rows_(rows), cols_(cols), kind_(std::move(kind)) {
    require_dims(rows >= cols && cols >= 1,
                 kind_ + " needs rows >= cols >= 1");
  }

  std::string kind() const override { return kind_; }
  Shape shape() const override { return {rows_, cols_}; }
  Index constraint_dim() const override { return cols_ * cols_; }

  Vector constraint(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM r = xm.transpose() * xm;
    r.diagonal().array() -= 1.0;
    return flatten(r);
  }

  Vector penalty_grad(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM r = xm.transpose() * xm;
    r.diagonal().array() -= 1.0;
    return flatten(MatrixRM(2.0 * xm * r));
  }

  Point cd_map(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM k = -0.5 * (xm.transpose() * xm);
    k.diagonal().array() += 1.5;
    return Point(flatten(MatrixRM(xm * k)), shape());
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const auto xm = x.mat();
    const Eigen::Map<const MatrixRM> wm(w.data(), rows_, cols_);
    MatrixRM k = -0.5 * (xm.transpose() * xm);
    k.diagonal().array() += 1.5;
    MatrixRM out = wm * k;
    out.noalias() -= 0.5 * (xm * (wm.transpose() * xm));
    out.noalias() -= 0.5 * (xm * (xm.transpose() * wm));
    return flatten(out);
  }

  Point init_point(Rng& rng) const override {
    return Point(flatten(random_orthonormal(rows_, cols_, rng)), shape());
  }

  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM j = MatrixRM::Zero(rows_ * cols_, cols_ * cols_);
    for (Index i = 0; i < cols_; ++i)
      for (Index jj = 0; jj < cols_; ++jj) {
        const Index q = i * cols_ + jj;
        for (Index r = 0; r < rows_; ++r) {
          j(r * cols_ + i, q) += xm(r, jj);
          j(r * cols_ + jj, q) += xm(r, i);
        }
      }
    return j;
  }

 protected:
  Index rows_, cols_;

 private:
  std::string kind_;
};

// ---------------------------------------------------------------------------
// X^T B X = I for symmetric B. Covers the generalized Stiefel manifold
// (B positive definite) and the hyperbolic manifold (B indefinite).

class BQuadraticManifold final : public ManifoldBase {
 public:
  BQuadraticManifold(Index rows, Index cols, Eigen::MatrixXd b,
                     std::string kind, bool require_pd)
      : rows_(rows), cols_(cols), b_(std::move(b)), kind_(std::move(kind)) {
    require_dims(rows >= cols && cols >= 1,
                 kind_ + " needs rows >= cols >= 1");
    if (b_.rows() != rows_ || b_.cols() != rows_)
      fail(ErrorCode::dimension_mismatch,
           kind_ + " metric must be " + std::to_string(rows_) + "x" +
               std::to_string(rows_));
    const double skew = (b_ - b_.transpose()).cwiseAbs().maxCoeff();
    if (skew > 1e-12 * (1.0 + b_.cwiseAbs().maxCoeff()))
      fail(ErrorCode::non_symmetric, kind_ + " metric must be symmetric");
    b_ = 0.5 * (b_ + b_.transpose());

    // Feasible points are built from the positive part of the spectrum.
    const EighResult eig = sym_eigh(b_);
    const double scale = eig.eigenvalues.cwiseAbs().maxCoeff();
    if (require_pd && eig.eigenvalues[0] <= 1e-12 * scale)
      fail(ErrorCode::invalid_dims,
           kind_ + " metric must be positive definite");
    std::vector<Index> pos;
    for (Index i = 0; i < rows_; ++i)
      if (eig.eigenvalues[i] > 1e-12 * scale) pos.push_back(i);
    if (static_cast<Index>(pos.size()) < cols_)
      fail(ErrorCode::invalid_dims,
           kind_ + " metric has fewer than cols positive eigenvalues");
    basis_.resize(rows_, pos.size());
    for (std::size_t k = 0; k < pos.size(); ++k)
      basis_.col(k) = eig.eigenvectors.col(pos[k]) /
                      std::sqrt(eig.eigenvalues[pos[k]]);
  }

  std::string kind() const override { return kind_; }
  Shape shape() const override { return {rows_, cols_}; }
  Index constraint_dim() const override { return cols_ * cols_; }

  Vector constraint(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM r = xm.transpose() * (b_ * xm);
    r.diagonal().array() -= 1.0;
    return flatten(r);
  }

  Vector penalty_grad(const Point& x) const override {
    const auto xm = x.mat();
    const MatrixRM bx = b_ * xm;
    MatrixRM r = xm.transpose() * bx;
    r.diagonal().array() -= 1.0;
    return flatten(MatrixRM(2.0 * bx * r));
  }

  Point cd_map(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM k = -0.5 * (xm.transpose() * (b_ * xm));
    k.diagonal().array() += 1.5;
    return Point(flatten(MatrixRM(xm * k)), shape());
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const auto xm = x.mat();
    const Eigen::Map<const MatrixRM> wm(w.data(), rows_, cols_);
    const MatrixRM bx = b_ * xm;
    MatrixRM k = -0.5 * (xm.transpose() * bx);
    k.diagonal().array() += 1.5;
    MatrixRM out = wm * k;
    out.noalias() -=
        0.5 * (bx * (wm.transpose() * xm + xm.transpose() * wm));
    return flatten(out);
  }

  Point init_point(Rng& rng) const override {
    const MatrixRM u = random_orthonormal(basis_.cols(), cols_, rng);
    return Point(flatten(MatrixRM(basis_ * u)), shape());
  }

  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point& x) const override {
    const auto xm = x.mat();
    const MatrixRM y = b_ * xm;
    MatrixRM j = MatrixRM::Zero(rows_ * cols_, cols_ * cols_);
    for (Index i = 0; i < cols_; ++i)
      for (Index jj = 0; jj < cols_; ++jj) {
        const Index q = i * cols_ + jj;
        for (Index r = 0; r < rows_; ++r) {
          j(r * cols_ + i, q) += y(r, jj);
          j(r * cols_ + jj, q) += y(r, i);
        }
      }
    return j;
  }

 private:
  Index rows_, cols_;
  Eigen::MatrixXd b_;
  std::string kind_;
  Eigen::MatrixXd basis_;  // columns v_i / sqrt(lambda_i), positive pairs
};

// ---------------------------------------------------------------------------
// Symplectic Stiefel: X^T Q_m X = Q_s with Q_k the canonical skew form.
// A(X) = X(1.5 I + 0.5 Q_s X^T Q_m X).

class SymplecticStiefelManifold final : public ManifoldBase {
 public:
  SymplecticStiefelManifold(Index rows, Index cols)
      : rows_(rows), cols_(cols) {
    require_dims(rows >= 2 && cols >= 2 && rows % 2 == 0 && cols % 2 == 0,
                 "symplectic_stiefel needs even rows and cols >= 2");
    require_dims(rows >= cols, "symplectic_stiefel needs rows >= cols");
  }

  std::string kind() const override { return "symplectic_stiefel"; }
  Shape shape() const override { return {rows_, cols_}; }
  Index constraint_dim() const override { return cols_ * cols_; }

  Vector constraint(const Point& x) const override {
    return flatten(residual(x.mat()));
  }

  Vector penalty_grad(const Point& x) const override {
    const auto xm = x.mat();
    const MatrixRM c = residual(xm);
    return flatten(MatrixRM(-2.0 * left_q(MatrixRM(xm * c))));
  }

  Point cd_map(const Point& x) const override {
    const auto xm = x.mat();
    // K = 1.5 I + 0.5 Q_s X^T Q_m X
    MatrixRM k = 0.5 * left_q_small(MatrixRM(xm.transpose() * left_q(xm)));
    k.diagonal().array() += 1.5;
    return Point(flatten(MatrixRM(xm * k)), shape());
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const auto xm = x.mat();
    const Eigen::Map<const MatrixRM> wm(w.data(), rows_, cols_);
    const MatrixRM qx = left_q(xm);               // Q_m X
    const MatrixRM n = xm.transpose() * qx;       // X^T Q_m X
    MatrixRM k = 0.5 * right_q_small(n);          // 0.5 X^T Q_m X Q_s
    k.diagonal().array() += 1.5;
    MatrixRM out = wm * k;
    const MatrixRM inner = right_q_small(MatrixRM(wm.transpose() * xm)) +
                           left_q_small(MatrixRM(xm.transpose() * wm));
    out.noalias() += 0.5 * (qx * inner);
    return flatten(out);
  }

  Point init_point(Rng& rng) const override {
    const Index m = rows_ / 2, s = cols_ / 2;
    const MatrixRM u = random_orthonormal(m, s, rng);
    MatrixRM x = MatrixRM::Zero(rows_, cols_);
    x.topLeftCorner(m, s) = u;
    x.bottomRightCorner(m, s) = u;
    return Point(flatten(x), shape());
  }

  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point& x) const override {
    const MatrixRM y = left_q(x.mat());
    MatrixRM j = MatrixRM::Zero(rows_ * cols_, cols_ * cols_);
    for (Index i = 0; i < cols_; ++i)
      for (Index jj = 0; jj < cols_; ++jj) {
        const Index q = i * cols_ + jj;
        for (Index r = 0; r < rows_; ++r) {
          j(r * cols_ + i, q) += y(r, jj);
          j(r * cols_ + jj, q) -= y(r, i);
        }
      }
    return j;
  }

 private:
  // Q_m Z for 2m-row Z: [z_lower; -z_upper].
  MatrixRM left_q(const MatrixRM& z) const {
    const Index m = rows_ / 2;
    MatrixRM out(rows_, z.cols());
    out.topRows(m) = z.bottomRows(m);
    out.bottomRows(m) = -z.topRows(m);
    return out;
  }
  // Q_s Z for 2s-row Z.
  MatrixRM left_q_small(const MatrixRM& z) const {
    const Index s = cols_ / 2;
    MatrixRM out(cols_, z.cols());
    out.topRows(s) = z.bottomRows(s);
    out.bottomRows(s) = -z.topRows(s);
    return out;
  }
  // Z Q_s for 2s-column Z.
  MatrixRM right_q_small(const MatrixRM& z) const {
    const Index s = cols_ / 2;
    MatrixRM out(z.rows(), cols_);
    out.leftCols(s) = -z.rightCols(s);
    out.rightCols(s) = z.leftCols(s);
    return out;
  }
  MatrixRM residual(const Eigen::Map<const MatrixRM>& xm) const {
    const Index s = cols_ / 2;
    MatrixRM c = xm.transpose() * left_q(xm);
    // subtract Q_s
    for (Index i = 0; i < s; ++i) {
      c(i, s + i) -= 1.0;
      c(s + i, i) += 1.0;
    }
    return c;
  }

  Index rows_, cols_;
};

// ---------------------------------------------------------------------------
// Range-constrained Stiefel: X^T X = I and X X^T e = e for a unit vector e.
// A(X) = X(1.5 I - 0.5 M + (M - 2I) z z^T) + e z^T with M = X^T X, z = X^T e.

class RangeStiefelManifold final : public ManifoldBase {
 public:
  RangeStiefelManifold(Index rows, Index cols, Vector e)
      : rows_(rows), cols_(cols), e_(std::move(e)) {
    require_dims(rows >= cols && cols >= 1,
                 "stiefel_range needs rows >= cols >= 1");
    if (e_.size() != rows_)
      fail(ErrorCode::dimension_mismatch,
           "stiefel_range direction must have length rows");
    const double norm = e_.norm();
    if (std::abs(norm - 1.0) > 1e-8)
      fail(ErrorCode::invalid_dims,
           "stiefel_range direction must be a unit vector");
    e_ /= norm;
  }

  std::string kind() const override { return "stiefel_range"; }
  Shape shape() const override { return {rows_, cols_}; }
  Index constraint_dim() const override { return cols_ * cols_ + rows_; }

  Vector constraint(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM r = xm.transpose() * xm;
    r.diagonal().array() -= 1.0;
    const Vector z = xm.transpose() * e_;
    Vector c(cols_ * cols_ + rows_);
    c.head(cols_ * cols_) = flatten(r);
    c.tail(rows_) = xm * z - e_;
    return c;
  }

  Vector penalty_grad(const Point& x) const override {
    const auto xm = x.mat();
    MatrixRM rmat = xm.transpose() * xm;
    rmat.diagonal().array() -= 1.0;
    const Vector z = xm.transpose() * e_;
    const Vector range_resid = xm * z - e_;
    MatrixRM g = 2.0 * xm * rmat;
    g.noalias() += range_resid * z.transpose();
    g.noalias() += e_ * (xm.transpose() * range_resid).transpose();
    return flatten(g);
  }

  Point cd_map(const Point& x) const override {
    const auto xm = x.mat();
    const Vector z = xm.transpose() * e_;
    MatrixRM m = xm.transpose() * xm;
    MatrixRM k = -0.5 * m;
    k.diagonal().array() += 1.5;
    MatrixRM shifted = m;  // M - 2I
    shifted.diagonal().array() -= 2.0;
    k.noalias() += shifted * (z * z.transpose());
    MatrixRM a = xm * k;
    a.noalias() += e_ * z.transpose();
    return Point(flatten(a), shape());
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const auto xm = x.mat();
    const Eigen::Map<const MatrixRM> wm(w.data(), rows_, cols_);
    const Vector z = xm.transpose() * e_;
    const MatrixRM m = xm.transpose() * xm;
    MatrixRM n = m;  // M - 2I
    n.diagonal().array() -= 2.0;
    const MatrixRM p = z * z.transpose();
    const MatrixRM g = xm.transpose() * wm;

    MatrixRM kt = -0.5 * m;  // K^T = 1.5 I - 0.5 M + P N
    kt.diagonal().array() += 1.5;
    kt.noalias() += p * n;

    MatrixRM out = wm * kt;
    out.noalias() += e_ * (e_.transpose() * wm);
    out.noalias() -= 0.5 * (xm * (g + g.transpose()));
    out.noalias() += xm * (p * g.transpose() + g * p);
    out.noalias() += e_ * (z.transpose() * (g.transpose() * n + n * g));
    return flatten(out);
  }

  Point init_point(Rng& rng) const override {
    // Orthonormal frame [e | complement] spun by a random rotation.
    MatrixRM frame(rows_, cols_);
    frame.col(0) = e_;
    if (cols_ > 1) {
      Eigen::MatrixXd g(rows_, cols_ - 1);
      for (;;) {
        for (Index j = 0; j < cols_ - 1; ++j)
          g.col(j) = rng.gaussian_vector(rows_);
        g -= e_ * (e_.transpose() * g);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        const Eigen::MatrixXd r =
            qr.matrixQR().topLeftCorner(cols_ - 1, cols_ - 1);
        if (r.diagonal().cwiseAbs().minCoeff() > 1e-10) {
          frame.rightCols(cols_ - 1) =
              qr.householderQ() * Eigen::MatrixXd::Identity(rows_, cols_ - 1);
          break;
        }
      }
    }
    const MatrixRM spin = random_orthonormal(cols_, cols_, rng);
    return Point(flatten(MatrixRM(frame * spin)), shape());
  }

  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point& x) const override {
    const auto xm = x.mat();
    const Vector z = xm.transpose() * e_;
    MatrixRM j = MatrixRM::Zero(rows_ * cols_, cols_ * cols_ + rows_);
    for (Index i = 0; i < cols_; ++i)
      for (Index jj = 0; jj < cols_; ++jj) {
        const Index q = i * cols_ + jj;
        for (Index r = 0; r < rows_; ++r) {
          j(r * cols_ + i, q) += xm(r, jj);
          j(r * cols_ + jj, q) += xm(r, i);
        }
      }
    for (Index k = 0; k < rows_; ++k) {
      const Index q = cols_ * cols_ + k;
      for (Index jj = 0; jj < cols_; ++jj) {
        j(k * cols_ + jj, q) += z[jj];
        for (Index r = 0; r < rows_; ++r) j(r * cols_ + jj, q) += e_[r] * xm(k, jj);
      }
    }
    return j;
  }

 private:
  Index rows_, cols_;
  Vector e_;
};

// ---------------------------------------------------------------------------
// Euclidean: no constraint, A is the identity.

class EuclideanManifold final : public ManifoldBase {
 public:
  EuclideanManifold(Index rows, Index cols) : rows_(rows), cols_(cols) {
    require_dims(rows >= 1 && cols >= 1, "euclidean needs rows, cols >= 1");
  }

  std::string kind() const override { return "euclidean"; }
  Shape shape() const override { return {rows_, cols_}; }
  Index constraint_dim() const override { return 0; }

  Vector constraint(const Point&) const override { return Vector(0); }
  Vector penalty_grad(const Point& x) const override {
    return Vector::Zero(x.size());
  }
  Point cd_map(const Point& x) const override { return x; }
  Vector cd_map_adjoint(const Point&, const Vector& w) const override {
    return w;
  }
  Point init_point(Rng& rng) const override {
    return Point(rng.gaussian_vector(rows_ * cols_), shape());
  }
  bool has_constraint_jacobian() const override { return true; }
  MatrixRM constraint_jacobian(const Point&) const override {
    return MatrixRM(rows_ * cols_, 0);
  }

 private:
  Index rows_, cols_;
};

}  // namespace

Manifold make_euclidean(Index rows, Index cols) {
  return Manifold(std::make_shared<EuclideanManifold>(rows, cols));
}

Manifold make_sphere(Index n) {
  return Manifold(std::make_shared<SphereManifold>(n));
}

Manifold make_oblique(Index rows, Index cols) {
  return Manifold(std::make_shared<ObliqueManifold>(rows, cols));
}

Manifold make_stiefel(Index rows, Index cols) {
  return Manifold(std::make_shared<StiefelManifold>(rows, cols));
}

Manifold make_grassmann(Index rows, Index cols) {
  return Manifold(std::make_shared<StiefelManifold>(rows, cols, "grassmann"));
}

Manifold make_generalized_stiefel(Index rows, Index cols, Eigen::MatrixXd b) {
  return Manifold(std::make_shared<BQuadraticManifold>(
      rows, cols, std::move(b), "generalized_stiefel", true));
}

Manifold make_hyperbolic(Index rows, Index cols, Eigen::MatrixXd b) {
  return Manifold(std::make_shared<BQuadraticManifold>(
      rows, cols, std::move(b), "hyperbolic", false));
}

Manifold make_symplectic_stiefel(Index rows, Index cols) {
  return Manifold(std::make_shared<SymplecticStiefelManifold>(rows, cols));
}

Manifold make_stiefel_range(Index rows, Index cols, Vector e) {
  return Manifold(
      std::make_shared<RangeStiefelManifold>(rows, cols, std::move(e)));
}

Manifold make_named_manifold(const std::string& kind, Index rows, Index cols,
                             Rng& param_rng) {
  if (kind == "euclidean") return make_euclidean(rows, cols);
  if (kind == "sphere") return make_sphere(rows);
  if (kind == "oblique") return make_oblique(rows, cols);
  if (kind == "stiefel") return make_stiefel(rows, cols);
  if (kind == "grassmann") return make_grassmann(rows, cols);
  if (kind == "generalized_stiefel") {
    // Random well-conditioned SPD metric.
    const MatrixRM g = param_rng.gaussian_matrix(rows, rows);
    Eigen::MatrixXd b = (g.transpose() * g) / static_cast<double>(rows);
    b.diagonal().array() += 0.5;
    return make_generalized_stiefel(rows, cols, std::move(b));
  }
  if (kind == "hyperbolic") {
    // Signature split: +1 on the first half (rounded up), -1 on the rest.
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows, rows);
    const Index pos = (rows + 1) / 2;
    for (Index i = 0; i < rows; ++i) b(i, i) = (i < pos) ? 1.0 : -1.0;
    return make_hyperbolic(rows, cols, std::move(b));
  }
  if (kind == "symplectic_stiefel") return make_symplectic_stiefel(rows, cols);
  if (kind == "stiefel_range") {
    Vector e = param_rng.gaussian_vector(rows);
    while (e.norm() < 1e-12) e = param_rng.gaussian_vector(rows);
    e /= e.norm();
    return make_stiefel_range(rows, cols, std::move(e));
  }
  if (kind == "product")
    return make_product({make_sphere(rows), make_stiefel(rows, cols)});
  if (kind == "auto") {
    // The Stiefel constraint routed through the auto-generated mapping.
    const Manifold reference = make_stiefel(rows, cols);
    const Shape shape = reference.shape();
    return make_auto_manifold(
        [reference, shape](const Vector& x) {
          return reference.constraint(Point(x, shape));
        },
        shape, reference.constraint_dim(), AutoManifoldConfig{});
  }
  fail(ErrorCode::config_error, "unknown manifold kind '" + kind + "'");
}

}  // namespace dissolve
