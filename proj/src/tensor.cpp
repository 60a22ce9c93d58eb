#include "stcr/tensor.hpp"

#include <functional>
#include <numeric>
#include <sstream>

namespace stcr {

Index numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {
void check_dims(const Shape& shape) {
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] < 1) {
      throw DimensionError("tensor axis " + std::to_string(i) + " has size " +
                           std::to_string(shape[i]) + "; sizes must be >= 1");
    }
  }
}
}  // namespace

Tensor::Tensor(Shape shape) : Tensor(std::move(shape), 0.0) {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_ = VectorXd::Constant(numel(shape_), fill);
}

Tensor::Tensor(Shape shape, VectorXd data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_dims(shape_);
  if (numel(shape_) != data_.size()) {
    throw DimensionError("shape " + to_string(shape_) + " holds " + std::to_string(numel(shape_)) +
                         " values but data has " + std::to_string(data_.size()));
  }
}

Tensor::Tensor(Shape shape, std::initializer_list<double> values)
    : Tensor(std::move(shape), Eigen::Map<const VectorXd>(values.begin(),
                                                          static_cast<Index>(values.size()))) {}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item() on tensor of shape " + to_string(shape_));
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return;
  if (a.rank() != b.rank()) {
    throw DimensionError(std::string(op) + ": rank mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
  for (Index axis = 0; axis < a.rank(); ++axis) {
    if (a.dim(axis) != b.dim(axis)) {
      throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " mismatch " +
                           to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
  }
}

}  // namespace stcr
