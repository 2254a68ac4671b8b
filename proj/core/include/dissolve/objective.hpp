#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "dissolve/types.hpp"

namespace dissolve {

// Counting wrapper around a smooth objective f. The value oracle is
// mandatory; without a gradient oracle, gradients fall back to central
// differences of f (each such gradient costs 2n value calls, and those
// probes are counted as value evaluations).
//
// Copies share the underlying counters, so a problem and the report built
// from it observe the same totals. fork() yields a handle with the same
// oracles but fresh counters.
class ObjectiveOracle {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradFn = std::function<Vector(const Point&)>;

  explicit ObjectiveOracle(ValueFn value, GradFn gradient = nullptr);

  double value(const Point& x) const;
  Vector gradient(const Point& x) const;
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

  std::int64_t value_evals() const;
  std::int64_t gradient_evals() const;

  ObjectiveOracle fork() const;

 private:
  ValueFn value_;
  GradFn gradient_;
  struct Counters;
  std::shared_ptr<Counters> counters_;
};

}  // namespace dissolve
