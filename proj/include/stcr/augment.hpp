#pragma once

#include <span>
#include <string>
#include <vector>

#include "stcr/clip.hpp"
#include "stcr/random.hpp"

namespace stcr {

enum class MixVariant { Intra, Inter, VideoMixup, CutMix, GaussianNoise };

std::string to_string(MixVariant v);
MixVariant parse_mix_variant(const std::string& name);

/// What a noise-path augmentation did to one clip. For CutMix `lambda` is the
/// mean replaced area fraction and the frame index is frame 0's source; for
/// GaussianNoise both are zero.
struct MixupRecord {
  double lambda = 0.0;
  Index source_frame_index = 0;
  MixVariant variant = MixVariant::Intra;
};

struct Augmented {
  VideoClip clip;
  MixupRecord record;
};

/// Beta(alpha, alpha) through two Gamma(alpha, 1) draws.
double sample_symmetric_beta(double alpha, Rng& rng);

/// Every frame j of `clip` becomes (1 - lambda) * clip_j + lambda * source_k.
VideoClip mix_with_frame(const VideoClip& clip, const VideoClip& source, Index k, double lambda);

Augmented intra_video_mixup(const VideoClip& clip, double alpha, Rng& rng);
Augmented inter_video_mixup(const VideoClip& clip, const VideoClip& other, double alpha, Rng& rng);

VideoClip video_mixup(const VideoClip& a, const VideoClip& b, double lambda);
Augmented video_mixup(const VideoClip& a, const VideoClip& b, double alpha, Rng& rng);

/// Rectangle copied into one frame of the target from frame `source_frame` of the donor.
struct CutRegion {
  Index top = 0, left = 0, height = 0, width = 0;
  Index source_frame = 0;
};

/// One region per frame of `a`.
VideoClip video_cutmix(const VideoClip& a, const VideoClip& b, std::span<const CutRegion> regions);
Augmented video_cutmix(const VideoClip& a, const VideoClip& b, Rng& rng);

/// Adds the same C x H x W field to every frame.
VideoClip add_frame_noise(const VideoClip& clip, const Tensor& field);
Augmented gaussian_noise(const VideoClip& clip, double sigma, Rng& rng);

}  // namespace stcr
