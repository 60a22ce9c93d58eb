#include "stcr/augment.hpp"

#include <algorithm>
#include <cmath>

namespace stcr {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("mixup: alpha must be positive");
}

Index uniform_index(Index n, Rng& rng) {
  return std::uniform_int_distribution<Index>(0, n - 1)(rng);
}

}  // namespace

std::string to_string(MixVariant v) {
  switch (v) {
    case MixVariant::Intra: return "intra";
    case MixVariant::Inter: return "inter";
    case MixVariant::VideoMixup: return "video_mixup";
    case MixVariant::CutMix: return "cutmix";
    case MixVariant::GaussianNoise: return "gaussian_noise";
  }
  return "unknown";
}

MixVariant parse_mix_variant(const std::string& name) {
  for (auto v : {MixVariant::Intra, MixVariant::Inter, MixVariant::VideoMixup, MixVariant::CutMix,
                 MixVariant::GaussianNoise}) {
    if (to_string(v) == name) return v;
  }
  throw ArgumentError("unknown augmentation variant '" + name + "'");
}

double sample_symmetric_beta(double alpha, Rng& rng) {
  require_alpha(alpha);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  return x / (x + y);
}

VideoClip mix_with_frame(const VideoClip& clip, const VideoClip& source, Index k, double lambda) {
  require_same_clip_shape(clip, source, "mix_with_frame");
  if (k < 0 || k >= source.frames()) throw ArgumentError("mix_with_frame: frame index out of range");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("mix_with_frame: lambda outside [0, 1]");
  VideoClip out = clip;
  const Index n = clip.frame_size();
  for (Index c = 0; c < clip.channels(); ++c) {
    const auto donor = source.tensor().data().segment(((c * source.frames()) + k) * n, n);
    for (Index t = 0; t < clip.frames(); ++t) {
      auto frame = out.tensor().data().segment((c * clip.frames() + t) * n, n);
      // Entries already equal to the donor are fixed points; keep them bit-exact.
      frame.array() = (frame.array() == donor.array())
                          .select(frame.array(), (1.0 - lambda) * frame.array() + lambda * donor.array());
    }
  }
  return out;
}

Augmented intra_video_mixup(const VideoClip& clip, double alpha, Rng& rng) {
  require_alpha(alpha);
  if (clip.frames() < 2) throw ArgumentError("intra_video_mixup: clip needs at least 2 frames");
  const double lambda = sample_symmetric_beta(alpha, rng);
  const Index k = uniform_index(clip.frames(), rng);
  return {mix_with_frame(clip, clip, k, lambda), {lambda, k, MixVariant::Intra}};
}

Augmented inter_video_mixup(const VideoClip& clip, const VideoClip& other, double alpha, Rng& rng) {
  require_alpha(alpha);
  require_same_clip_shape(clip, other, "inter_video_mixup");
  const double lambda = sample_symmetric_beta(alpha, rng);
  const Index k = uniform_index(other.frames(), rng);
  return {mix_with_frame(clip, other, k, lambda), {lambda, k, MixVariant::Inter}};
}

VideoClip video_mixup(const VideoClip& a, const VideoClip& b, double lambda) {
  require_same_clip_shape(a, b, "video_mixup");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("video_mixup: lambda outside [0, 1]");
  const auto x = a.tensor().data().array();
  const auto y = b.tensor().data().array();
  const VectorXd mixed = (x == y).select(x, (1.0 - lambda) * x + lambda * y);
  return VideoClip(Tensor(a.shape(), mixed));
}

Augmented video_mixup(const VideoClip& a, const VideoClip& b, double alpha, Rng& rng) {
  require_same_clip_shape(a, b, "video_mixup");
  const double lambda = sample_symmetric_beta(alpha, rng);
  return {video_mixup(a, b, lambda), {lambda, 0, MixVariant::VideoMixup}};
}

VideoClip video_cutmix(const VideoClip& a, const VideoClip& b, std::span<const CutRegion> regions) {
  require_same_clip_shape(a, b, "video_cutmix");
  if (static_cast<Index>(regions.size()) != a.frames()) {
    throw ArgumentError("video_cutmix: need one region per frame");
  }
  VideoClip out = a;
  for (Index t = 0; t < a.frames(); ++t) {
    const CutRegion& r = regions[static_cast<std::size_t>(t)];
    if (r.top < 0 || r.left < 0 || r.height < 0 || r.width < 0 || r.top + r.height > a.height() ||
        r.left + r.width > a.width() || r.source_frame < 0 || r.source_frame >= b.frames()) {
      throw ArgumentError("video_cutmix: region outside the frame");
    }
    for (Index c = 0; c < a.channels(); ++c)
      for (Index h = r.top; h < r.top + r.height; ++h)
        for (Index w = r.left; w < r.left + r.width; ++w) out.at(c, t, h, w) = b.at(c, r.source_frame, h, w);
  }
  return out;
}

Augmented video_cutmix(const VideoClip& a, const VideoClip& b, Rng& rng) {
  require_same_clip_shape(a, b, "video_cutmix");
  if (a.height() < 2 || a.width() < 2) throw DimensionError("video_cutmix: frames must be at least 2x2");
  std::uniform_real_distribution<double> fraction(0.1, 0.5);
  std::vector<CutRegion> regions(static_cast<std::size_t>(a.frames()));
  double covered = 0.0;
  const double area = static_cast<double>(a.frame_size());
  for (auto& r : regions) {
    const double target = fraction(rng) * area;
    r.height = std::clamp<Index>(std::lround(std::sqrt(target)), 1, a.height());
    r.width = std::clamp<Index>(std::lround(target / static_cast<double>(r.height)), 1, a.width());
    r.top = uniform_index(a.height() - r.height + 1, rng);
    r.left = uniform_index(a.width() - r.width + 1, rng);
    r.source_frame = uniform_index(b.frames(), rng);
    covered += static_cast<double>(r.height * r.width) / area;
  }
  const double mean_fraction = covered / static_cast<double>(regions.size());
  return {video_cutmix(a, b, regions), {mean_fraction, regions.front().source_frame, MixVariant::CutMix}};
}

VideoClip add_frame_noise(const VideoClip& clip, const Tensor& field) {
  if (field.shape() != Shape{clip.channels(), clip.height(), clip.width()}) {
    throw DimensionError("gaussian_noise: field shape " + to_string(field.shape()) +
                         " must be C x H x W of the clip");
  }
  VideoClip out = clip;
  const Index n = clip.frame_size();
  for (Index c = 0; c < clip.channels(); ++c) {
    const auto noise = field.data().segment(c * n, n);
    for (Index t = 0; t < clip.frames(); ++t) out.tensor().data().segment((c * clip.frames() + t) * n, n) += noise;
  }
  return out;
}

Augmented gaussian_noise(const VideoClip& clip, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ArgumentError("gaussian_noise: sigma must be >= 0");
  Tensor field(Shape{clip.channels(), clip.height(), clip.width()});
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& v : field.values()) v = normal(rng);
  }
  return {add_frame_noise(clip, field), {0.0, 0, MixVariant::GaussianNoise}};
}

}  // namespace stcr
