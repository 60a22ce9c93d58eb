#include "stcr/autodiff.hpp"

#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stcr {

namespace detail {

Var make_node(Tensor value, std::string op, std::vector<Var> parents, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = std::move(op);
  node->requires_grad =
      std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p->requires_grad; });
  node->parents = std::move(parents);
  if (node->requires_grad) node->backward_fn = std::move(fn);
  return node;
}

}  // namespace detail

using detail::make_node;

namespace {

// Nodes reachable from `root` through requires-grad edges, parents before children.
std::vector<const Node*> topological_order(const Node* root) {
  std::vector<const Node*> order;
  std::unordered_map<const Node*, bool> visited;
  std::vector<std::pair<const Node*, std::size_t>> stack{{root, 0}};
  visited[root] = true;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited[parent]) {
        visited[parent] = true;
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

Var leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = requires_grad ? "param" : "const";
  node->requires_grad = requires_grad;
  return node;
}

Var constant(Tensor value) { return leaf(std::move(value), false); }

Tensor GradientStore::of(const Var& leaf) const {
  if (auto it = grads_.find(leaf.get()); it != grads_.end()) return it->second;
  return Tensor::zeros(leaf->value.shape());
}

GradientStore backward(const Var& loss) {
  if (!loss->value.is_scalar()) {
    throw ArgumentError("backward: loss must be scalar, got shape " + to_string(loss->value.shape()));
  }
  GradientStore store;
  if (!loss->requires_grad) return store;

  const auto order = topological_order(loss.get());
  std::unordered_map<const Node*, Tensor> grads;
  grads.emplace(loss.get(), Tensor(loss->value.shape(), 1.0));

  std::vector<Tensor*> parent_grads;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* node = *it;
    auto found = grads.find(node);
    if (found == grads.end()) continue;
    if (node->is_leaf()) {
      store.grads_.emplace(node, std::move(found->second));
      continue;
    }
    parent_grads.clear();
    for (const auto& parent : node->parents) {
      if (!parent->requires_grad) {
        parent_grads.push_back(nullptr);
        continue;
      }
      auto [slot, inserted] = grads.try_emplace(parent.get());
      if (inserted) slot->second = Tensor::zeros(parent->value.shape());
      parent_grads.push_back(&slot->second);
    }
    node->backward_fn(*node, found->second, parent_grads);
    grads.erase(found);
  }
  return store;
}

// ---------------------------------------------------------------------------
// Elementwise

Var relu(const Var& x) {
  Tensor out(x->value.shape(), x->value.data().cwiseMax(0.0));
  return make_node(std::move(out), "relu", {x}, [](const Node& self, const Tensor& g, auto grads) {
    const auto& in = self.parents[0]->value.data();
    grads[0]->data().array() += (in.array() > 0.0).select(g.data().array(), 0.0);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a->value, b->value, "add");
  Tensor out(a->value.shape(), a->value.data() + b->value.data());
  return make_node(std::move(out), "add", {a, b}, [](const Node&, const Tensor& g, auto grads) {
    for (Tensor* slot : grads) {
      if (slot) slot->data() += g.data();
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a->value, b->value, "sub");
  Tensor out(a->value.shape(), a->value.data() - b->value.data());
  return make_node(std::move(out), "sub", {a, b}, [](const Node&, const Tensor& g, auto grads) {
    if (grads[0]) grads[0]->data() += g.data();
    if (grads[1]) grads[1]->data() -= g.data();
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a->value, b->value, "mul");
  Tensor out(a->value.shape(), a->value.data().cwiseProduct(b->value.data()));
  return make_node(std::move(out), "mul", {a, b}, [](const Node& self, const Tensor& g, auto grads) {
    if (grads[0]) grads[0]->data() += g.data().cwiseProduct(self.parents[1]->value.data());
    if (grads[1]) grads[1]->data() += g.data().cwiseProduct(self.parents[0]->value.data());
  });
}

Var scale(const Var& x, double factor) {
  Tensor out(x->value.shape(), x->value.data() * factor);
  return make_node(std::move(out), "scale", {x}, [factor](const Node&, const Tensor& g, auto grads) {
    grads[0]->data() += factor * g.data();
  });
}

Var elementwise(ElementwiseKind kind, std::span<const Var> args, double factor) {
  const std::size_t arity =
      (kind == ElementwiseKind::Relu || kind == ElementwiseKind::Scale) ? 1 : 2;
  if (args.size() != arity) {
    throw ArgumentError("elementwise: expected " + std::to_string(arity) + " arguments, got " +
                        std::to_string(args.size()));
  }
  switch (kind) {
    case ElementwiseKind::Relu: return relu(args[0]);
    case ElementwiseKind::Add: return add(args[0], args[1]);
    case ElementwiseKind::Sub: return sub(args[0], args[1]);
    case ElementwiseKind::Mul: return mul(args[0], args[1]);
    case ElementwiseKind::Scale: return scale(args[0], factor);
  }
  throw ArgumentError("elementwise: unknown kind");
}

// ---------------------------------------------------------------------------
// Reductions

namespace {

struct ReductionPlan {
  Shape out_shape;
  std::vector<Index> out_index;  // input flat index -> output flat index
  Index group_size = 1;
};

ReductionPlan plan_reduction(const Shape& in, std::vector<Index> axes) {
  if (axes.empty()) throw ArgumentError("reduce: empty axis set");
  std::sort(axes.begin(), axes.end());
  axes.erase(std::unique(axes.begin(), axes.end()), axes.end());
  const Index rank = static_cast<Index>(in.size());
  std::vector<bool> reduced(in.size(), false);
  for (Index axis : axes) {
    if (axis < 0 || axis >= rank) {
      throw ArgumentError("reduce: axis " + std::to_string(axis) + " invalid for shape " +
                          to_string(in));
    }
    reduced[static_cast<std::size_t>(axis)] = true;
  }

  ReductionPlan plan;
  for (std::size_t a = 0; a < in.size(); ++a) {
    if (reduced[a]) {
      plan.group_size *= in[a];
    } else {
      plan.out_shape.push_back(in[a]);
    }
  }
  // Stride of each input axis inside the output array (0 for reduced axes).
  std::vector<Index> out_stride(in.size(), 0);
  Index stride = 1;
  for (std::size_t a = in.size(); a-- > 0;) {
    if (!reduced[a]) {
      out_stride[a] = stride;
      stride *= in[a];
    }
  }
  const Index total = numel(in);
  plan.out_index.resize(static_cast<std::size_t>(total));
  std::vector<Index> counter(in.size(), 0);
  Index out = 0;
  for (Index i = 0; i < total; ++i) {
    plan.out_index[static_cast<std::size_t>(i)] = out;
    for (std::size_t a = in.size(); a-- > 0;) {
      out += out_stride[a];
      if (++counter[a] < in[a]) break;
      out -= out_stride[a] * in[a];
      counter[a] = 0;
    }
  }
  return plan;
}

}  // namespace

Var reduce(ReduceKind kind, const Var& x, std::vector<Index> axes) {
  auto plan = std::make_shared<ReductionPlan>(plan_reduction(x->value.shape(), std::move(axes)));
  const auto& in = x->value.data();
  const Index n_out = numel(plan->out_shape);
  Tensor out(plan->out_shape, 0.0);

  switch (kind) {
    case ReduceKind::Sum:
    case ReduceKind::Mean: {
      for (Index i = 0; i < in.size(); ++i) out[plan->out_index[static_cast<std::size_t>(i)]] += in[i];
      const double factor = kind == ReduceKind::Mean ? 1.0 / static_cast<double>(plan->group_size) : 1.0;
      if (kind == ReduceKind::Mean) out.data() *= factor;
      return make_node(std::move(out), kind == ReduceKind::Mean ? "mean" : "sum", {x},
                       [plan, factor](const Node&, const Tensor& g, auto grads) {
                         auto& dx = grads[0]->data();
                         for (Index i = 0; i < dx.size(); ++i) {
                           dx[i] += factor * g[plan->out_index[static_cast<std::size_t>(i)]];
                         }
                       });
    }
    case ReduceKind::Max: {
      auto argmax = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(n_out), -1);
      for (Index i = 0; i < in.size(); ++i) {
        const Index o = plan->out_index[static_cast<std::size_t>(i)];
        Index& best = (*argmax)[static_cast<std::size_t>(o)];
        // Strict comparison keeps the first maximum in scan order.
        if (best < 0 || in[i] > in[best]) best = i;
      }
      for (Index o = 0; o < n_out; ++o) out[o] = in[(*argmax)[static_cast<std::size_t>(o)]];
      return make_node(std::move(out), "max", {x}, [argmax](const Node&, const Tensor& g, auto grads) {
        auto& dx = grads[0]->data();
        for (std::size_t o = 0; o < argmax->size(); ++o) dx[(*argmax)[o]] += g[static_cast<Index>(o)];
      });
    }
  }
  throw ArgumentError("reduce: unknown kind");
}

Var reduce_all(ReduceKind kind, const Var& x) {
  std::vector<Index> axes(static_cast<std::size_t>(x->value.rank()));
  for (std::size_t a = 0; a < axes.size(); ++a) axes[a] = static_cast<Index>(a);
  if (axes.empty()) return x;
  return reduce(kind, x, std::move(axes));
}

// ---------------------------------------------------------------------------
// Affine

Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Tensor& in = x->value;
  const Tensor& w = weight->value;
  if (w.rank() != 2) throw DimensionError("linear: weight must be rank 2, got " + to_string(w.shape()));
  const Index d_out = w.dim(0);
  const Index d_in = w.dim(1);
  if (in.rank() < 1 || in.dim(in.rank() - 1) != d_in) {
    throw DimensionError("linear: last input axis of " + to_string(in.shape()) +
                         " must equal weight input width " + std::to_string(d_in));
  }
  if (bias->value.rank() != 1 || bias->value.dim(0) != d_out) {
    throw DimensionError("linear: bias shape " + to_string(bias->value.shape()) +
                         " must be [" + std::to_string(d_out) + "]");
  }
  const Index rows = in.size() / d_in;
  Eigen::Map<const RowMatrixXd> X(in.data().data(), rows, d_in);
  Eigen::Map<const RowMatrixXd> W(w.data().data(), d_out, d_in);

  Shape out_shape = in.shape();
  out_shape.back() = d_out;
  Tensor out(out_shape);
  Eigen::Map<RowMatrixXd> Y(out.data().data(), rows, d_out);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += bias->value.data().transpose();

  return make_node(std::move(out), "linear", {x, weight, bias},
                   [rows, d_in, d_out](const Node& self, const Tensor& g, auto grads) {
                     Eigen::Map<const RowMatrixXd> dY(g.data().data(), rows, d_out);
                     if (grads[0]) {
                       Eigen::Map<const RowMatrixXd> W(self.parents[1]->value.data().data(), d_out, d_in);
                       Eigen::Map<RowMatrixXd> dX(grads[0]->data().data(), rows, d_in);
                       dX.noalias() += dY * W;
                     }
                     if (grads[1]) {
                       Eigen::Map<const RowMatrixXd> X(self.parents[0]->value.data().data(), rows, d_in);
                       Eigen::Map<RowMatrixXd> dW(grads[1]->data().data(), d_out, d_in);
                       dW.noalias() += dY.transpose() * X;
                     }
                     if (grads[2]) grads[2]->data() += dY.colwise().sum().transpose();
                   });
}

Var linear(const Var& x, const Var& weight) {
  if (weight->value.rank() != 2) {
    throw DimensionError("linear: weight must be rank 2, got " + to_string(weight->value.shape()));
  }
  return linear(x, weight, constant(Tensor::zeros(Shape{weight->value.dim(0)})));
}

// ---------------------------------------------------------------------------
// Divergence

namespace {
VectorXd log_softmax(const VectorXd& logits) {
  const double shift = logits.maxCoeff();
  const VectorXd centered = logits.array() - shift;
  return centered.array() - std::log(centered.array().exp().sum());
}
}  // namespace

Var softmax_kl(const Var& logits_p, const Var& logits_q) {
  require_same_shape(logits_p->value, logits_q->value, "softmax_kl");
  if (!logits_p->value.all_finite() || !logits_q->value.all_finite()) {
    throw NumericError("softmax_kl: non-finite logits");
  }
  auto log_p = std::make_shared<VectorXd>(log_softmax(logits_p->value.data()));
  auto log_q = std::make_shared<VectorXd>(log_softmax(logits_q->value.data()));
  const VectorXd p = log_p->array().exp();
  // Rounding can leave a -1e-17 residue; KL is non-negative by Gibbs.
  const double kl = std::max(0.0, p.dot(*log_p - *log_q));

  return make_node(Tensor::scalar(kl), "softmax_kl", {logits_p, logits_q},
                   [log_p, log_q](const Node& self, const Tensor& g, auto grads) {
                     const double upstream = g[0];
                     const VectorXd p = log_p->array().exp();
                     const VectorXd q = log_q->array().exp();
                     if (grads[0]) {
                       const double kl = self.value[0];
                       grads[0]->data().array() +=
                           upstream * p.array() * ((*log_p - *log_q).array() - kl);
                     }
                     if (grads[1]) grads[1]->data() += upstream * (q - p);
                   });
}

Var mse(const Var& a, const Var& b) {
  require_same_shape(a->value, b->value, "mse");
  auto diff = sub(a, b);
  return reduce_all(ReduceKind::Mean, mul(diff, diff));
}

// ---------------------------------------------------------------------------
// Index maps

Var gather(const Var& x, Shape out_shape, std::shared_ptr<const std::vector<Index>> source,
           std::string op) {
  if (static_cast<Index>(source->size()) != numel(out_shape)) {
    throw DimensionError("gather: index map of length " + std::to_string(source->size()) +
                         " does not fill shape " + to_string(out_shape));
  }
  const auto& in = x->value.data();
  Tensor out(std::move(out_shape));
  for (std::size_t i = 0; i < source->size(); ++i) {
    const Index s = (*source)[i];
    if (s < 0 || s >= in.size()) throw DimensionError("gather: source index out of range");
    out[static_cast<Index>(i)] = in[s];
  }
  return make_node(std::move(out), std::move(op), {x}, [source](const Node&, const Tensor& g, auto grads) {
    auto& dx = grads[0]->data();
    for (std::size_t i = 0; i < source->size(); ++i) dx[(*source)[i]] += g[static_cast<Index>(i)];
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x->value.reshaped(std::move(shape));
  return make_node(std::move(out), "reshape", {x}, [](const Node&, const Tensor& g, auto grads) {
    grads[0]->data() += g.data();
  });
}

}  // namespace stcr
