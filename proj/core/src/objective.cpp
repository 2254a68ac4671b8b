#include "dissolve/objective.hpp"

#include <atomic>
#include <utility>

#include "dissolve/finite_diff.hpp"

namespace dissolve {

struct ObjectiveOracle::Counters {
  std::atomic<std::int64_t> values{0};
  std::atomic<std::int64_t> gradients{0};
};

ObjectiveOracle::ObjectiveOracle(ValueFn value, GradFn gradient)
    : value_(std::move(value)),
      gradient_(std::move(gradient)),
      counters_(std::make_shared<Counters>()) {
  if (!value_)
    fail(ErrorCode::config_error, "objective needs a value oracle");
}

double ObjectiveOracle::value(const Point& x) const {
  counters_->values.fetch_add(1, std::memory_order_relaxed);
  const double v = value_(x);
  require_finite(v, "objective value");
  return v;
}

Vector ObjectiveOracle::gradient(const Point& x) const {
  if (gradient_) {
    counters_->gradients.fetch_add(1, std::memory_order_relaxed);
    Vector g = gradient_(x);
    if (g.size() != x.size())
      fail(ErrorCode::dimension_mismatch,
           "objective gradient has length " + std::to_string(g.size()) +
               ", expected " + std::to_string(x.size()));
    require_finite(g, "objective gradient");
    return g;
  }
  // Count the fallback as one gradient; its probes count as value calls.
  counters_->gradients.fetch_add(1, std::memory_order_relaxed);
  const Shape shape = x.shape;
  return fd_gradient(
      [this, shape](const Vector& flat) {
        return this->value(Point(flat, shape));
      },
      x.data);
}

std::int64_t ObjectiveOracle::value_evals() const {
  return counters_->values.load(std::memory_order_relaxed);
}

std::int64_t ObjectiveOracle::gradient_evals() const {
  return counters_->gradients.load(std::memory_order_relaxed);
}

ObjectiveOracle ObjectiveOracle::fork() const {
  return ObjectiveOracle(value_, gradient_);
}

}  // namespace dissolve
