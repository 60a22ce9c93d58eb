#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "stcr/tensor.hpp"

namespace stcr {

struct Node;
using Var = std::shared_ptr<const Node>;

/// Accumulates the gradient of every parent that requires one.
/// `parent_grads[i]` is null when parent i does not require a gradient.
using BackwardFn =
    std::function<void(const Node& self, const Tensor& upstream, std::span<Tensor* const> parent_grads)>;

/// One vertex of the computation graph. Nodes are immutable once built, so a
/// graph can be differentiated any number of times.
struct Node {
  Tensor value;
  std::string op;
  std::vector<Var> parents;
  bool requires_grad = false;
  BackwardFn backward_fn;

  bool is_leaf() const { return parents.empty(); }
};

/// Trainable or differentiable input.
Var leaf(Tensor value, bool requires_grad = true);
/// Non-differentiable input.
Var constant(Tensor value);

/// Gradients of a scalar w.r.t. the leaves it depends on.
class GradientStore {
 public:
  bool contains(const Var& leaf) const { return grads_.count(leaf.get()) != 0; }
  /// Gradient of `leaf`; a zero tensor when the loss does not depend on it.
  Tensor of(const Var& leaf) const;
  std::size_t size() const { return grads_.size(); }

 private:
  friend GradientStore backward(const Var& loss);
  std::unordered_map<const Node*, Tensor> grads_;
};

/// Reverse-mode sweep from a scalar loss.
GradientStore backward(const Var& loss);

using Triple = std::array<Index, 3>;

Var conv3d(const Var& input, const Var& kernel, const Var& bias, Triple stride, Triple padding);
/// Output extent of one convolution axis.
Index conv_out_dim(Index in, Index kernel, Index stride, Index pad);

Var relu(const Var& x);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);

enum class ElementwiseKind { Relu, Add, Sub, Mul, Scale };
/// Dispatching form of the elementwise family. `factor` is used by Scale only.
Var elementwise(ElementwiseKind kind, std::span<const Var> args, double factor = 1.0);

enum class ReduceKind { Max, Mean, Sum };
/// Removes `axes` from the input shape. Max routes its gradient to the first
/// maximal element in row-major scan order.
Var reduce(ReduceKind kind, const Var& x, std::vector<Index> axes);
Var reduce_all(ReduceKind kind, const Var& x);

/// Affine map along the last axis: y = x W^T + b.
Var linear(const Var& x, const Var& weight, const Var& bias);
/// Bias-free form: y = x W^T.
Var linear(const Var& x, const Var& weight);

/// KL(softmax(p) || softmax(q)), evaluated in log space.
Var softmax_kl(const Var& logits_p, const Var& logits_q);

/// Mean squared difference over all entries.
Var mse(const Var& a, const Var& b);

/// out[i] = x[source[i]]. The gradient scatters back through the same map.
Var gather(const Var& x, Shape out_shape, std::shared_ptr<const std::vector<Index>> source,
           std::string op = "gather");

Var reshape(const Var& x, Shape shape);

}  // namespace stcr
