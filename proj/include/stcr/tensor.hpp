#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "stcr/errors.hpp"

namespace stcr {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using VectorXd = Eigen::VectorXd;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles. The last axis varies fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, double fill);
  Tensor(Shape shape, VectorXd data);
  Tensor(Shape shape, std::initializer_list<double> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor scalar(double v) { return Tensor(Shape{}, v); }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return data_.size(); }
  bool is_scalar() const { return data_.size() == 1; }

  VectorXd& data() { return data_; }
  const VectorXd& data() const { return data_; }
  std::span<double> values() { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<const double> values() const {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }

  double& operator[](Index i) { return data_[i]; }
  double operator[](Index i) const { return data_[i]; }

  // 4-axis accessors for (c, t, h, w) clips and feature maps.
  double& at(Index c, Index t, Index h, Index w) { return data_[offset4(c, t, h, w)]; }
  double at(Index c, Index t, Index h, Index w) const { return data_[offset4(c, t, h, w)]; }
  double item() const;

  Tensor reshaped(Shape shape) const;
  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Index offset4(Index c, Index t, Index h, Index w) const {
    return ((c * shape_[1] + t) * shape_[2] + h) * shape_[3] + w;
  }

  Shape shape_;
  VectorXd data_;
};

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace stcr
