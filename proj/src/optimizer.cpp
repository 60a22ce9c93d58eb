#include <cmath>

#include "stcr/train.hpp"

namespace stcr {

double learning_rate_at(const TrainConfig& config, int epoch) {
  return config.learning_rate * std::pow(config.lr_decay_factor, epoch / config.lr_decay_every);
}

TrainState TrainState::fresh(ModelParams params) {
  TrainState state;
  for (const auto& [name, t] : params.named()) state.momentum.push_back(Tensor::zeros(t->shape()));
  state.params = std::move(params);
  return state;
}

bool operator==(const TrainState& a, const TrainState& b) {
  return a.step == b.step && a.epoch == b.epoch && a.params == b.params && a.momentum == b.momentum;
}

void sgd_momentum_update(ModelParams& params, std::span<const Tensor> grads, std::vector<Tensor>& buffers,
                         double lr, double momentum, double weight_decay) {
  auto named = params.named();
  if (grads.size() != named.size() || buffers.size() != named.size()) {
    throw DimensionError("sgd_momentum_update: gradient/buffer count does not match parameters");
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    Tensor& p = *named[i].second;
    require_same_shape(p, grads[i], "sgd_momentum_update");
    require_same_shape(p, buffers[i], "sgd_momentum_update");
    auto& buf = buffers[i].data();
    buf = momentum * buf + grads[i].data() + weight_decay * p.data();
    p.data() -= lr * buf;
  }
}

}  // namespace stcr
