#include "dissolve/rng.hpp"

#include <cmath>

namespace dissolve {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::non_symmetric: return "non_symmetric";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::singular_pivot: return "singular_pivot";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::non_finite_evaluation: return "non_finite_evaluation";
    case ErrorCode::diverged: return "diverged";
    case ErrorCode::max_iter_exceeded: return "max_iter_exceeded";
    case ErrorCode::infeasible_init: return "infeasible_init";
    case ErrorCode::empty_product: return "empty_product";
    case ErrorCode::invalid_beta: return "invalid_beta";
    case ErrorCode::invalid_dims: return "invalid_dims";
    case ErrorCode::config_error: return "config_error";
  }
  return "unknown_error";
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 shifted into (0, 1] so the log stays finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) fail(ErrorCode::invalid_dims, "uniform_index bound is zero");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % bound;
}

Vector Rng::gaussian_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gaussian();
  return v;
}

MatrixRM Rng::gaussian_matrix(Index rows, Index cols) {
  MatrixRM m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = gaussian();
  return m;
}

Rng Rng::split(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(index)));
}

Point sample_uniform_ball(const Point& center, double radius, Rng& rng) {
  if (!(radius > 0.0))
    fail(ErrorCode::invalid_dims, "ball radius must be positive");
  const Index n = center.size();
  Vector dir = rng.gaussian_vector(n);
  const double norm = dir.norm();
  if (norm == 0.0) return center;  // measure-zero draw, center is valid
  const double scale =
      radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
  return center.with_data(center.data + (scale / norm) * dir);
}

MatrixRM random_orthonormal(Index rows, Index cols, Rng& rng) {
  if (rows < cols || cols < 1)
    fail(ErrorCode::dimension_mismatch,
         "orthonormal factor needs rows >= cols >= 1, got " +
             std::to_string(rows) + "x" + std::to_string(cols));
  const MatrixRM g = rng.gaussian_matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd r =
      qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  // Fix column signs against the R diagonal so the factor is unique.
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return MatrixRM(q);
}

}  // namespace dissolve
