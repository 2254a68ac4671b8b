#include "dissolve/product_manifold.hpp"

#include <numeric>
#include <utility>

namespace dissolve {

namespace {

class ProductManifold final : public ManifoldBase {
 public:
  explicit ProductManifold(std::vector<Manifold> parts)
      : parts_(std::move(parts)) {
    if (parts_.empty())
      fail(ErrorCode::empty_product, "product manifold needs at least one part");
    ambient_offsets_.reserve(parts_.size() + 1);
    residual_offsets_.reserve(parts_.size() + 1);
    Index na = 0, nc = 0;
    for (const Manifold& m : parts_) {
      ambient_offsets_.push_back(na);
      residual_offsets_.push_back(nc);
      na += m.ambient_dim();
      nc += m.constraint_dim();
    }
    ambient_offsets_.push_back(na);
    residual_offsets_.push_back(nc);
    jacobian_available_ = true;
    for (const Manifold& m : parts_)
      jacobian_available_ = jacobian_available_ && m.has_constraint_jacobian();
  }

  std::string kind() const override { return "product"; }

  std::string describe() const override {
    std::string out = "product(";
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) out += ", ";
      out += parts_[i].describe();
    }
    return out + ")";
  }

  Shape shape() const override { return {ambient_offsets_.back(), 1}; }
  Index constraint_dim() const override { return residual_offsets_.back(); }

  Vector constraint(const Point& x) const override {
    Vector c(constraint_dim());
    for_each_block(x, [&](std::size_t i, const Point& xi) {
      c.segment(residual_offsets_[i], res_dim(i)) = parts_[i].constraint(xi);
    });
    return c;
  }

  Vector penalty_grad(const Point& x) const override {
    Vector g(ambient_dim());
    for_each_block(x, [&](std::size_t i, const Point& xi) {
      g.segment(ambient_offsets_[i], amb_dim(i)) = parts_[i].penalty_grad(xi);
    });
    return g;
  }

  Point cd_map(const Point& x) const override {
    Vector a(ambient_dim());
    for_each_block(x, [&](std::size_t i, const Point& xi) {
      a.segment(ambient_offsets_[i], amb_dim(i)) = parts_[i].cd_map(xi).data;
    });
    return Point(std::move(a), shape());
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    Vector out(ambient_dim());
    for_each_block(x, [&](std::size_t i, const Point& xi) {
      out.segment(ambient_offsets_[i], amb_dim(i)) = parts_[i].cd_map_adjoint(
          xi, w.segment(ambient_offsets_[i], amb_dim(i)));
    });
    return out;
  }

  Point init_point(Rng& rng) const override {
    Vector x(ambient_dim());
    for (std::size_t i = 0; i < parts_.size(); ++i)
      x.segment(ambient_offsets_[i], amb_dim(i)) =
          parts_[i].init_point(rng).data;
    return Point(std::move(x), shape());
  }

  bool has_constraint_jacobian() const override { return jacobian_available_; }

  MatrixRM constraint_jacobian(const Point& x) const override {
    if (!jacobian_available_)
      fail(ErrorCode::invalid_dims,
           "a product part does not provide a constraint Jacobian");
    MatrixRM j = MatrixRM::Zero(ambient_dim(), constraint_dim());
    for_each_block(x, [&](std::size_t i, const Point& xi) {
      j.block(ambient_offsets_[i], residual_offsets_[i], amb_dim(i),
              res_dim(i)) = parts_[i].constraint_jacobian(xi);
    });
    return j;
  }

 private:
  Index amb_dim(std::size_t i) const {
    return ambient_offsets_[i + 1] - ambient_offsets_[i];
  }
  Index res_dim(std::size_t i) const {
    return residual_offsets_[i + 1] - residual_offsets_[i];
  }

  template <typename Fn>
  void for_each_block(const Point& x, Fn&& fn) const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      Point xi(x.data.segment(ambient_offsets_[i], amb_dim(i)),
               parts_[i].shape());
      fn(i, xi);
    }
  }

  std::vector<Manifold> parts_;
  std::vector<Index> ambient_offsets_;
  std::vector<Index> residual_offsets_;
  bool jacobian_available_ = false;
};

}  // namespace

Manifold make_product(std::vector<Manifold> parts) {
  return Manifold(std::make_shared<ProductManifold>(std::move(parts)));
}

}  // namespace dissolve
