#include "stcr/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stcr {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("train: learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (lr_decay_every < 1) throw ConfigError("train: lr_decay_every must be >= 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) throw ConfigError("train: lr_decay_factor must be in (0, 1]");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigError("train: gamma must be >= 0");
  if (!(alpha > 0.0)) throw ConfigError("train: alpha must be > 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError("train: noise_sigma must be >= 0");
  if (crop[0] < 1 || crop[1] < 1 || crop[2] < 1) throw ConfigError("train: crop sizes must be positive");
  if (crop[1] != crop[2]) throw ConfigError("train: crop must be spatially square");
}

VideoClip crop_clip(const VideoClip& video, Index t0, Index h0, Index w0, Triple crop) {
  const auto [ct, ch, cw] = crop;
  if (t0 < 0 || h0 < 0 || w0 < 0 || t0 + ct > video.frames() || h0 + ch > video.height() || w0 + cw > video.width()) {
    throw DimensionError("crop " + std::to_string(ct) + "x" + std::to_string(ch) + "x" + std::to_string(cw) +
                         " at (" + std::to_string(t0) + "," + std::to_string(h0) + "," + std::to_string(w0) +
                         ") exceeds video " + to_string(video.shape()));
  }
  VideoClip out(video.channels(), ct, ch, cw);
  for (Index c = 0; c < video.channels(); ++c)
    for (Index t = 0; t < ct; ++t)
      for (Index h = 0; h < ch; ++h)
        for (Index w = 0; w < cw; ++w) out.at(c, t, h, w) = video.at(c, t0 + t, h0 + h, w0 + w);
  return out;
}

VideoClip center_crop(const VideoClip& video, Triple crop) {
  return crop_clip(video, (video.frames() - crop[0]) / 2, (video.height() - crop[1]) / 2,
                   (video.width() - crop[2]) / 2, crop);
}

std::pair<VideoClip, VideoClip> double_crop(const VideoClip& video, Triple crop, Rng& rng) {
  if (crop[1] != crop[2]) throw ArgumentError("double_crop: crop must be spatially square");
  const Index slack[3] = {video.frames() - crop[0], video.height() - crop[1], video.width() - crop[2]};
  for (int a = 0; a < 3; ++a) {
    if (slack[a] < 0) {
      throw DimensionError("double_crop: crop exceeds video on axis " + std::string(1, "THW"[a]) + " (" +
                           to_string(video.shape()) + ")");
    }
  }
  auto draw = [&rng](Index hi) { return std::uniform_int_distribution<Index>(0, hi)(rng); };
  const Index t0 = draw(slack[0]);
  const Index h1 = draw(slack[1]), w1 = draw(slack[2]);
  Index h2 = draw(slack[1]), w2 = draw(slack[2]);
  if (h1 == h2 && w1 == w2) {
    h2 = draw(slack[1]);
    w2 = draw(slack[2]);
  }
  return {crop_clip(video, t0, h1, w1, crop), crop_clip(video, t0, h2, w2, crop)};
}

double collapse_metric(std::span<const Tensor> descriptors) {
  if (descriptors.size() < 2) throw ArgumentError("collapse_metric: needs a batch of at least 2");
  const Index n = descriptors.front().size();
  // deviations are taken from the first sample so identical inputs give exactly 0
  const VectorXd& origin = descriptors.front().data();
  VectorXd mean = VectorXd::Zero(n);
  for (const auto& d : descriptors) {
    if (d.size() != n) throw DimensionError("collapse_metric: descriptors differ in size");
    mean += d.data() - origin;
  }
  const double count = static_cast<double>(descriptors.size());
  mean /= count;
  VectorXd var = VectorXd::Zero(n);
  for (const auto& d : descriptors) var.array() += (d.data() - origin - mean).array().square();
  return (var / count).array().sqrt().mean();
}

namespace {

Augmented augment_noise_path(const VideoClip& clip, const VideoClip& other, const TrainConfig& config, Rng& rng) {
  switch (config.variant) {
    case MixVariant::Intra: return intra_video_mixup(clip, config.alpha, rng);
    case MixVariant::Inter: return inter_video_mixup(clip, other, config.alpha, rng);
    case MixVariant::VideoMixup: return video_mixup(clip, other, config.alpha, rng);
    case MixVariant::CutMix: return video_cutmix(clip, other, rng);
    case MixVariant::GaussianNoise: return gaussian_noise(clip, config.noise_sigma, rng);
  }
  throw ArgumentError("unknown augmentation variant");
}

}  // namespace

StepOutcome pretrain_step(const TrainState& state, std::span<const VideoClip> batch, const BackboneConfig& model,
                          const TrainConfig& config, Rng& rng, std::span<const PretextHead> pretext) {
  if (batch.empty()) throw ArgumentError("pretrain_step: empty batch");
  const Shape expected{model.input_shape[0], config.crop[0], config.crop[1], config.crop[2]};
  if (expected != model.input_shape) {
    throw ConfigError("pretrain_step: crop " + to_string(expected) + " does not match backbone input " +
                      to_string(model.input_shape));
  }

  const ModelVars vars = bind_params(state.params);
  StepOutcome outcome;
  std::vector<Var> totals;
  std::vector<Tensor> descriptors;
  LossReport sum{0.0, 0.0, 0.0, config.gamma};

  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto [x_clean, x_noise] = double_crop(batch[i], config.crop, rng);
    const TransformId t = stt_sample(rng);
    x_noise = VideoClip(stt_apply_clip(x_noise.tensor(), t));
    // Donor for the two-video variants: a crop of the next clip in the batch.
    VideoClip other = x_noise;
    if (config.variant != MixVariant::Intra && config.variant != MixVariant::GaussianNoise) {
      other = double_crop(batch[(i + 1) % batch.size()], config.crop, rng).first;
    }
    Augmented noisy = augment_noise_path(x_noise, other, config, rng);

    SiameseOutputs out = siamese_loss(model, vars, constant(x_clean.tensor()), constant(noisy.clip.tensor()), t,
                                      config.gamma);
    Var total = out.total;
    for (const auto& head : pretext) total = add(total, head(out.feature_clean));

    totals.push_back(total);
    descriptors.push_back(out.descriptor_clean->value);
    sum.l_tw += out.report.l_tw;
    sum.l_cw += out.report.l_cw;
    sum.total += total->value.item();
    outcome.records.push_back(noisy.record);
    outcome.transforms.push_back(t);
  }

  Var loss = totals.front();
  for (std::size_t i = 1; i < totals.size(); ++i) loss = add(loss, totals[i]);
  const double inv = 1.0 / static_cast<double>(batch.size());
  loss = scale(loss, inv);

  const GradientStore grads = backward(loss);
  std::vector<Tensor> grad_list;
  for (const Var& v : vars.all()) grad_list.push_back(grads.of(v));

  outcome.state = state;
  sgd_momentum_update(outcome.state.params, grad_list, outcome.state.momentum, learning_rate_at(config, state.epoch),
                      config.momentum, config.weight_decay);
  outcome.state.step = state.step + 1;

  outcome.report = {sum.l_tw * inv, sum.l_cw * inv, sum.total * inv, config.gamma};
  outcome.collapse =
      descriptors.size() >= 2 ? collapse_metric(descriptors) : std::numeric_limits<double>::quiet_NaN();
  return outcome;
}

TrainState run_pretraining(std::span<const VideoClip> videos, const BackboneConfig& model, const TrainConfig& config,
                           TrainState state, const std::function<void(const TrainLogRow&)>& on_step,
                           std::span<const PretextHead> pretext) {
  config.validate();
  model.validate();
  if (videos.empty()) throw ArgumentError("run_pretraining: empty dataset");
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = state.epoch; epoch < config.epochs; ++epoch) {
    state.epoch = epoch;
    std::vector<std::size_t> order(videos.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = derive_rng(config.seed, {static_cast<std::uint64_t>(epoch), 0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (std::size_t start = 0, b = 0; start < order.size(); start += batch_size, ++b) {
      std::vector<VideoClip> batch;
      for (std::size_t i = start; i < std::min(start + batch_size, order.size()); ++i) batch.push_back(videos[order[i]]);
      Rng step_rng = derive_rng(config.seed, {static_cast<std::uint64_t>(epoch), b + 1});
      StepOutcome outcome = pretrain_step(state, batch, model, config, step_rng, pretext);
      if (on_step) {
        on_step({outcome.state.step, epoch, learning_rate_at(config, epoch), outcome.report, outcome.collapse,
                 outcome.records.front()});
      }
      state = std::move(outcome.state);
    }
  }
  state.epoch = std::max(state.epoch, config.epochs);
  return state;
}

}  // namespace stcr
