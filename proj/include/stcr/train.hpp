#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stcr/augment.hpp"
#include "stcr/losses.hpp"
#include "stcr/model.hpp"

namespace stcr {

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  int epochs = 50;
  int lr_decay_every = 10;
  double lr_decay_factor = 0.1;
  int batch_size = 8;
  double gamma = kDefaultGamma;
  double alpha = 1.0;
  Triple crop{8, 12, 12};
  std::uint64_t seed = 0;
  /// Noise-path augmentation applied after the spatio-temporal transform.
  MixVariant variant = MixVariant::Intra;
  /// Standard deviation for the GaussianNoise variant.
  double noise_sigma = 0.1;

  void validate() const;
};

/// lr0 * factor^floor(epoch / decay_every).
double learning_rate_at(const TrainConfig& config, int epoch);

struct TrainState {
  ModelParams params;
  std::vector<Tensor> momentum;  // one buffer per ModelParams::named() entry
  std::int64_t step = 0;
  int epoch = 0;

  static TrainState fresh(ModelParams params);
  friend bool operator==(const TrainState&, const TrainState&);
};

/// buffer <- momentum * buffer + grad + weight_decay * param;  param <- param - lr * buffer.
void sgd_momentum_update(ModelParams& params, std::span<const Tensor> grads, std::vector<Tensor>& buffers,
                         double lr, double momentum, double weight_decay);

/// Two crops sharing one temporal window at independently drawn spatial offsets.
std::pair<VideoClip, VideoClip> double_crop(const VideoClip& video, Triple crop, Rng& rng);
VideoClip crop_clip(const VideoClip& video, Index t0, Index h0, Index w0, Triple crop);
VideoClip center_crop(const VideoClip& video, Triple crop);

/// Extra self-supervised objective on the clean-path feature map.
using PretextHead = std::function<Var(const Var& feature)>;

struct StepOutcome {
  TrainState state;
  LossReport report;  // batch means
  double collapse = 0.0;  // NaN for a batch of one
  std::vector<MixupRecord> records;
  std::vector<TransformId> transforms;
};

StepOutcome pretrain_step(const TrainState& state, std::span<const VideoClip> batch, const BackboneConfig& model,
                          const TrainConfig& config, Rng& rng, std::span<const PretextHead> pretext = {});

/// Mean over coordinates of the across-batch population standard deviation.
double collapse_metric(std::span<const Tensor> descriptors);

struct TrainLogRow {
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 0.0;
  LossReport report;
  double collapse = 0.0;
  MixupRecord record;  // first clip of the batch
};

/// Full pretraining loop. Clip order is reshuffled each epoch from the seed;
/// each batch draws its augmentations from its own derived stream.
TrainState run_pretraining(std::span<const VideoClip> videos, const BackboneConfig& model, const TrainConfig& config,
                           TrainState state, const std::function<void(const TrainLogRow&)>& on_step = {},
                           std::span<const PretextHead> pretext = {});

}  // namespace stcr
