#pragma once

#include <string>
#include <vector>

#include "stcr/autodiff.hpp"
#include "stcr/clip.hpp"
#include "stcr/random.hpp"

namespace stcr {

/// Stack of conv3d + relu stages. Every stage uses the same kernel extent and
/// padding; strides vary per stage.
struct BackboneConfig {
  std::vector<Index> channels{8, 16};
  Triple kernel{3, 3, 3};
  Triple padding{1, 1, 1};
  std::vector<Triple> strides{{1, 2, 2}, {2, 2, 2}};
  Shape input_shape{3, 8, 12, 12};
  /// Use the clean-path head on the noise path as well.
  bool tie_heads = false;

  /// C' x T' x H' x W' produced for `input_shape`.
  Shape feature_shape() const;
  Index feature_frames() const { return feature_shape()[1]; }
  Index head_hidden() const;
  /// Throws ConfigError when the feature grid is not square or T' < 2.
  void validate() const;
};

struct ConvStage {
  Tensor kernel;  // Cout x Cin x kT x kH x kW
  Tensor bias;    // Cout
};

/// Per-channel temporal head: T' -> hidden -> 1 with relu in between. No
/// biases: a shift shared by all channel logits cancels inside the softmax.
struct HeadParams {
  Tensor fc1_weight, fc2_weight;
};

struct ModelParams {
  std::vector<ConvStage> theta;
  HeadParams w_c_1, w_c_2;

  /// Every tensor with a stable name, in checkpoint and flattening order.
  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;

  Index parameter_count() const;
  Tensor flatten() const;
  void assign_flat(const Tensor& flat);

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Xavier-uniform weights, zero biases.
ModelParams init_params(const BackboneConfig& config, Rng& rng);

/// Graph leaves mirroring ModelParams.
struct HeadVars {
  Var fc1_weight, fc2_weight;
};

struct ModelVars {
  std::vector<std::pair<Var, Var>> theta;  // (kernel, bias) per stage
  HeadVars w_c_1, w_c_2;

  /// Same order as ModelParams::named().
  std::vector<Var> all() const;
};

ModelVars bind_params(const ModelParams& params, bool requires_grad = true);
/// Views into one flat parameter vector; used for whole-model gradient checks.
ModelVars bind_flat(const ModelParams& layout, const Var& flat);

Var backbone_forward(const BackboneConfig& config, const ModelVars& vars, const Var& clip);
Var backbone_forward(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip);

/// Spatial global max pooling: C' x T' x H' x W' -> C' x T'.
Var psi_pool(const Var& feature);

/// Per-channel logits of length C'.
Var channel_head(const HeadVars& head, const Var& descriptor);

/// Head applied on the noise path.
const HeadVars& noise_head(const BackboneConfig& config, const ModelVars& vars);

void save_checkpoint(const std::string& path, const ModelParams& params);
/// Reads a checkpoint into the shapes implied by `config`.
ModelParams load_checkpoint(const std::string& path, const BackboneConfig& config);

}  // namespace stcr
