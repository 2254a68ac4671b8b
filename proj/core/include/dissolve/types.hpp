#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dissolve {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
// Matrices are stored row-major so that a flattened iterate and its matrix
// view share the same memory layout.
using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorCode {
  non_symmetric,
  dimension_mismatch,
  singular_pivot,
  no_convergence,
  non_finite_evaluation,
  diverged,
  max_iter_exceeded,
  infeasible_init,
  empty_product,
  invalid_beta,
  invalid_dims,
  config_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

struct Shape {
  Index rows{0};
  Index cols{1};

  Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

// An iterate: a flat coefficient vector plus the matrix shape it represents.
// The flat storage is the row-major flattening of the (rows x cols) view.
struct Point {
  Vector data;
  Shape shape{0, 1};

  Point() = default;
  Point(Vector values, Shape s) : data(std::move(values)), shape(s) {
    if (data.size() != shape.size())
      fail(ErrorCode::dimension_mismatch,
           "point data length " + std::to_string(data.size()) +
               " does not match shape " + std::to_string(shape.rows) + "x" +
               std::to_string(shape.cols));
  }

  static Point from_vector(Vector v) {
    const Index n = v.size();
    return Point(std::move(v), Shape{n, 1});
  }
  static Point from_matrix(const MatrixRM& m) {
    Vector flat = Eigen::Map<const Vector>(m.data(), m.size());
    return Point(std::move(flat), Shape{m.rows(), m.cols()});
  }

  Index size() const { return data.size(); }
  Index rows() const { return shape.rows; }
  Index cols() const { return shape.cols; }

  Eigen::Map<const MatrixRM> mat() const {
    return Eigen::Map<const MatrixRM>(data.data(), shape.rows, shape.cols);
  }
  Eigen::Map<MatrixRM> mat() {
    return Eigen::Map<MatrixRM>(data.data(), shape.rows, shape.cols);
  }

  Point with_data(Vector v) const { return Point(std::move(v), shape); }
};

inline void require_finite(const Vector& v, const char* context) {
  if (!v.allFinite())
    fail(ErrorCode::non_finite_evaluation,
         std::string(context) + " produced a non-finite value");
}

inline void require_finite(double x, const char* context) {
  if (!std::isfinite(x))
    fail(ErrorCode::non_finite_evaluation,
         std::string(context) + " produced a non-finite value");
}

}  // namespace dissolve
