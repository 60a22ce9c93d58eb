#include "stcr/model.hpp"

#include <algorithm>
#include <cmath>

namespace stcr {

Shape BackboneConfig::feature_shape() const {
  if (input_shape.size() != 4) throw ConfigError("backbone: input_shape must be C x T x H x W");
  Shape shape = input_shape;
  for (std::size_t s = 0; s < channels.size(); ++s) {
    shape[0] = channels[s];
    for (std::size_t a = 0; a < 3; ++a) {
      shape[a + 1] = conv_out_dim(shape[a + 1], kernel[a], strides.at(s)[a], padding[a]);
    }
  }
  return shape;
}

Index BackboneConfig::head_hidden() const { return std::max<Index>(feature_frames(), 4); }

void BackboneConfig::validate() const {
  if (channels.empty()) throw ConfigError("backbone: at least one stage is required");
  if (strides.size() != channels.size()) {
    throw ConfigError("backbone: " + std::to_string(strides.size()) + " strides for " +
                      std::to_string(channels.size()) + " stages");
  }
  if (input_shape.size() != 4 || std::any_of(input_shape.begin(), input_shape.end(), [](Index d) { return d < 1; })) {
    throw ConfigError("backbone: input_shape must be four positive sizes");
  }
  if (std::any_of(channels.begin(), channels.end(), [](Index c) { return c < 1; })) {
    throw ConfigError("backbone: channel counts must be positive");
  }
  Shape shape = input_shape;
  for (std::size_t s = 0; s < channels.size(); ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (kernel[a] < 1 || padding[a] < 0 || strides[s][a] < 1) {
        throw ConfigError("backbone: kernel, stride and padding must be positive");
      }
      if (kernel[a] > shape[a + 1] + 2 * padding[a]) {
        throw ConfigError("backbone: stage " + std::to_string(s) + " kernel exceeds its padded input");
      }
      shape[a + 1] = conv_out_dim(shape[a + 1], kernel[a], strides[s][a], padding[a]);
    }
  }
  if (shape[2] != shape[3]) {
    throw ConfigError("backbone: feature grid " + to_string(shape) + " is not square");
  }
  if (shape[1] < 2) throw ConfigError("backbone: feature grid keeps fewer than 2 time steps");
}

// ---------------------------------------------------------------------------

namespace {

template <typename Params, typename Out>
void collect_named(Params& p, Out& out) {
  for (std::size_t s = 0; s < p.theta.size(); ++s) {
    const std::string prefix = "theta." + std::to_string(s) + ".";
    out.emplace_back(prefix + "kernel", &p.theta[s].kernel);
    out.emplace_back(prefix + "bias", &p.theta[s].bias);
  }
  for (auto [name, head] : {std::pair{"w_c_1", &p.w_c_1}, std::pair{"w_c_2", &p.w_c_2}}) {
    const std::string prefix = std::string(name) + ".";
    out.emplace_back(prefix + "fc1.weight", &head->fc1_weight);
    out.emplace_back(prefix + "fc2.weight", &head->fc2_weight);
  }
}

void xavier_fill(Tensor& t, Index fan_in, Index fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  for (auto& v : t.values()) v = u(rng);
}

HeadParams init_head(Index frames, Index hidden, Rng& rng) {
  HeadParams h{Tensor(Shape{hidden, frames}), Tensor(Shape{1, hidden})};
  xavier_fill(h.fc1_weight, frames, hidden, rng);
  xavier_fill(h.fc2_weight, hidden, 1, rng);
  return h;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
  std::vector<std::pair<std::string, Tensor*>> out;
  collect_named(*this, out);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  collect_named(*this, out);
  return out;
}

Index ModelParams::parameter_count() const {
  Index n = 0;
  for (const auto& [name, t] : named()) n += t->size();
  return n;
}

Tensor ModelParams::flatten() const {
  Tensor flat(Shape{parameter_count()});
  Index offset = 0;
  for (const auto& [name, t] : named()) {
    flat.data().segment(offset, t->size()) = t->data();
    offset += t->size();
  }
  return flat;
}

void ModelParams::assign_flat(const Tensor& flat) {
  if (flat.size() != parameter_count()) throw DimensionError("assign_flat: parameter count mismatch");
  Index offset = 0;
  for (auto& [name, t] : named()) {
    t->data() = flat.data().segment(offset, t->size());
    offset += t->size();
  }
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  const auto na = a.named();
  const auto nb = b.named();
  if (na.size() != nb.size()) return false;
  for (std::size_t i = 0; i < na.size(); ++i) {
    if (na[i].first != nb[i].first || !(*na[i].second == *nb[i].second)) return false;
  }
  return true;
}

ModelParams init_params(const BackboneConfig& config, Rng& rng) {
  config.validate();
  ModelParams params;
  Index in_channels = config.input_shape[0];
  const Index taps = config.kernel[0] * config.kernel[1] * config.kernel[2];
  for (Index out_channels : config.channels) {
    ConvStage stage{Tensor(Shape{out_channels, in_channels, config.kernel[0], config.kernel[1], config.kernel[2]}),
                    Tensor(Shape{out_channels})};
    xavier_fill(stage.kernel, in_channels * taps, out_channels * taps, rng);
    params.theta.push_back(std::move(stage));
    in_channels = out_channels;
  }
  const Index frames = config.feature_frames();
  params.w_c_1 = init_head(frames, config.head_hidden(), rng);
  params.w_c_2 = init_head(frames, config.head_hidden(), rng);
  return params;
}

// ---------------------------------------------------------------------------

std::vector<Var> ModelVars::all() const {
  std::vector<Var> out;
  for (const auto& [k, b] : theta) {
    out.push_back(k);
    out.push_back(b);
  }
  for (const HeadVars* h : {&w_c_1, &w_c_2}) {
    out.insert(out.end(), {h->fc1_weight, h->fc2_weight});
  }
  return out;
}

namespace {

template <typename Make>
ModelVars bind_with(const ModelParams& params, Make make) {
  ModelVars vars;
  for (const auto& stage : params.theta) {
    // sequenced: bind_flat hands out consecutive slices in call order
    Var kernel = make(stage.kernel);
    Var bias = make(stage.bias);
    vars.theta.emplace_back(std::move(kernel), std::move(bias));
  }
  auto head = [&](const HeadParams& h) {
    return HeadVars{make(h.fc1_weight), make(h.fc2_weight)};
  };
  vars.w_c_1 = head(params.w_c_1);
  vars.w_c_2 = head(params.w_c_2);
  return vars;
}

}  // namespace

ModelVars bind_params(const ModelParams& params, bool requires_grad) {
  return bind_with(params, [requires_grad](const Tensor& t) { return leaf(t, requires_grad); });
}

ModelVars bind_flat(const ModelParams& layout, const Var& flat) {
  if (flat->value.size() != layout.parameter_count()) {
    throw DimensionError("bind_flat: flat vector has " + std::to_string(flat->value.size()) +
                         " entries, model needs " + std::to_string(layout.parameter_count()));
  }
  Index offset = 0;
  return bind_with(layout, [&](const Tensor& t) {
    auto slice = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(t.size()));
    for (Index i = 0; i < t.size(); ++i) (*slice)[static_cast<std::size_t>(i)] = offset + i;
    offset += t.size();
    return gather(flat, t.shape(), std::move(slice), "slice");
  });
}

Var backbone_forward(const BackboneConfig& config, const ModelVars& vars, const Var& clip) {
  if (clip->value.shape() != config.input_shape) {
    throw DimensionError("backbone_forward: clip shape " + to_string(clip->value.shape()) +
                         " does not match configured input " + to_string(config.input_shape));
  }
  if (vars.theta.size() != config.channels.size()) {
    throw DimensionError("backbone_forward: parameter stages do not match the configuration");
  }
  Var x = clip;
  for (std::size_t s = 0; s < vars.theta.size(); ++s) {
    x = relu(conv3d(x, vars.theta[s].first, vars.theta[s].second, config.strides[s], config.padding));
  }
  return x;
}

Var backbone_forward(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip) {
  return backbone_forward(config, bind_params(params, false), constant(clip.tensor()));
}

Var psi_pool(const Var& feature) {
  if (feature->value.rank() != 4) {
    throw DimensionError("psi_pool: expected C' x T' x H' x W', got " + to_string(feature->value.shape()));
  }
  return reduce(ReduceKind::Max, feature, {2, 3});
}

Var channel_head(const HeadVars& head, const Var& descriptor) {
  const Tensor& d = descriptor->value;
  if (d.rank() != 2) throw DimensionError("channel_head: descriptor must be C' x T', got " + to_string(d.shape()));
  if (d.dim(1) != head.fc1_weight->value.dim(1)) {
    throw DimensionError("channel_head: descriptor has " + std::to_string(d.dim(1)) +
                         " time steps, head expects " + std::to_string(head.fc1_weight->value.dim(1)));
  }
  const Var hidden = relu(linear(descriptor, head.fc1_weight));
  const Var logits = linear(hidden, head.fc2_weight);
  return reshape(logits, Shape{d.dim(0)});
}

const HeadVars& noise_head(const BackboneConfig& config, const ModelVars& vars) {
  return config.tie_heads ? vars.w_c_1 : vars.w_c_2;
}

}  // namespace stcr
