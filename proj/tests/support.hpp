#pragma once

#include <utility>

#include "dissolve/objective.hpp"
#include "dissolve/rng.hpp"

namespace dissolve::testing {

// Strongly convex quadratic plus a small quartic, with analytic gradient.
// Smooth everywhere, bounded below on bounded sets, and nontrivial on
// every manifold in the suite.
inline ObjectiveOracle random_smooth_objective(Index n, Rng& rng) {
  const MatrixRM m = rng.gaussian_matrix(n, n);
  auto q = std::make_shared<const Eigen::MatrixXd>(
      (m.transpose() * m / static_cast<double>(n)) +
      Eigen::MatrixXd::Identity(n, n));
  auto b = std::make_shared<const Vector>(rng.gaussian_vector(n));
  return ObjectiveOracle(
      [q, b](const Point& x) {
        const Vector& v = x.data;
        return 0.5 * v.dot(*q * v) + b->dot(v) +
               0.025 * v.array().square().square().sum();
      },
      [q, b](const Point& x) {
        const Vector& v = x.data;
        return Vector(*q * v + *b + 0.1 * v.array().cube().matrix());
      });
}

// f(x) = x^T diag(d) x with gradient 2 diag(d) x.
inline ObjectiveOracle rayleigh_objective(Vector d) {
  auto diag = std::make_shared<const Vector>(std::move(d));
  return ObjectiveOracle(
      [diag](const Point& x) {
        return x.data.dot(diag->cwiseProduct(x.data));
      },
      [diag](const Point& x) {
        return Vector(2.0 * diag->cwiseProduct(x.data));
      });
}

}  // namespace dissolve::testing

// Asserts that `expr` throws Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                        \
  do {                                                          \
    bool thrown_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const dissolve::Error& e_) {                       \
      thrown_ = true;                                           \
      CHECK(e_.code() == (expected));                           \
    }                                                           \
    CHECK_MESSAGE(thrown_, "expected an Error from " #expr);    \
  } while (0)
