#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "stcr/augment.hpp"
#include "test_util.hpp"

using namespace stcr;
using stcr::testing::random_clip;

namespace {

VideoClip frame_slice_as_clip(const VideoClip& clip, Index frame) {
  VideoClip out(clip.channels(), clip.frames(), clip.height(), clip.width());
  for (Index c = 0; c < clip.channels(); ++c)
    for (Index t = 0; t < clip.frames(); ++t)
      for (Index h = 0; h < clip.height(); ++h)
        for (Index w = 0; w < clip.width(); ++w) out.at(c, t, h, w) = clip.at(c, frame, h, w);
  return out;
}

double max_abs_diff(const VideoClip& a, const VideoClip& b) {
  return (a.tensor().data() - b.tensor().data()).cwiseAbs().maxCoeff();
}

/// One-sample KS statistic against Uniform(0, 1).
double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max({d, (i + 1) / n - xs[i], xs[i] - i / n});
  }
  return d;
}

}  // namespace

TEST_SUITE("augment") {
  TEST_CASE("clip validation") {
    CHECK_THROWS_AS(VideoClip(Tensor(Shape{2, 2})), DimensionError);
    CHECK_THROWS_AS(VideoClip(Tensor(Shape{1, 1, 1, 2}, {0.0, std::nan("")})), NumericError);
  }

  TEST_CASE("variant names round-trip") {
    for (MixVariant v : {MixVariant::Intra, MixVariant::Inter, MixVariant::VideoMixup, MixVariant::CutMix,
                         MixVariant::GaussianNoise}) {
      CHECK(parse_mix_variant(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_mix_variant("bogus"), ArgumentError);
  }

  TEST_CASE("mixing with a frame at the endpoints") {
    Rng rng(3);
    const VideoClip x = random_clip(2, 5, 4, 4, rng);
    CHECK(mix_with_frame(x, x, 2, 0.0) == x);
    CHECK(mix_with_frame(x, x, 2, 1.0) == frame_slice_as_clip(x, 2));
  }

  TEST_CASE("frame k is a fixed point for any lambda") {
    Rng rng(4);
    const VideoClip x = random_clip(3, 6, 5, 5, rng);
    for (double lambda : {0.1, 0.37, 0.5, 0.9}) {
      const VideoClip y = mix_with_frame(x, x, 4, lambda);
      for (Index c = 0; c < 3; ++c)
        for (Index h = 0; h < 5; ++h)
          for (Index w = 0; w < 5; ++w) REQUIRE(y.at(c, 4, h, w) == x.at(c, 4, h, w));
    }
  }

  TEST_CASE("motion differences are scaled, never reordered") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const VideoClip x = random_clip(2, 6, 4, 4, rng);
      const Augmented out = intra_video_mixup(x, 1.0, rng);
      const double scale = 1.0 - out.record.lambda;
      double worst = 0.0;
      for (Index c = 0; c < 2; ++c)
        for (Index j1 = 0; j1 < 6; ++j1)
          for (Index j2 = 0; j2 < 6; ++j2)
            for (Index h = 0; h < 4; ++h)
              for (Index w = 0; w < 4; ++w) {
                const double lhs = out.clip.at(c, j1, h, w) - out.clip.at(c, j2, h, w);
                const double rhs = scale * (x.at(c, j1, h, w) - x.at(c, j2, h, w));
                worst = std::max(worst, std::abs(lhs - rhs));
              }
      CHECK(worst <= 1e-12);
    }
  }

  TEST_CASE("intra mixup record and errors") {
    Rng rng(6);
    const VideoClip x = random_clip(1, 4, 3, 3, rng);
    for (int i = 0; i < 100; ++i) {
      const Augmented out = intra_video_mixup(x, 1.0, rng);
      CHECK(out.record.variant == MixVariant::Intra);
      CHECK(out.record.lambda >= 0.0);
      CHECK(out.record.lambda <= 1.0);
      CHECK(out.record.source_frame_index >= 0);
      CHECK(out.record.source_frame_index < 4);
      CHECK(max_abs_diff(out.clip, mix_with_frame(x, x, out.record.source_frame_index, out.record.lambda)) == 0.0);
    }
    CHECK_THROWS_AS(intra_video_mixup(random_clip(1, 1, 3, 3, rng), 1.0, rng), ArgumentError);
    CHECK_THROWS_AS(intra_video_mixup(x, 0.0, rng), ArgumentError);
  }

  TEST_CASE("inter mixup") {
    Rng rng(7);
    const VideoClip a(1, 3, 2, 2, 2.0), b(1, 3, 2, 2, 4.0);
    const VideoClip half = mix_with_frame(a, b, 1, 0.5);
    CHECK(half == VideoClip(1, 3, 2, 2, 3.0));
    CHECK(mix_with_frame(a, b, 0, 0.0) == a);

    // with other == clip, the same seed gives the same draw as intra mixup
    const VideoClip x = random_clip(2, 4, 3, 3, rng);
    Rng r1(11), r2(11);
    const Augmented intra = intra_video_mixup(x, 1.0, r1);
    const Augmented inter = inter_video_mixup(x, x, 1.0, r2);
    CHECK(intra.clip == inter.clip);
    CHECK(inter.record.variant == MixVariant::Inter);
    CHECK_THROWS_AS(inter_video_mixup(x, random_clip(2, 4, 3, 4, rng), 1.0, rng), DimensionError);
  }

  TEST_CASE("video mixup") {
    Rng rng(8);
    const VideoClip a = random_clip(2, 3, 4, 4, rng), b = random_clip(2, 3, 4, 4, rng);
    CHECK(video_mixup(a, b, 0.0) == a);
    CHECK(video_mixup(a, b, 1.0) == b);
    CHECK(video_mixup(a, a, 0.3) == a);
    const Augmented out = video_mixup(a, b, 1.0, rng);
    CHECK(max_abs_diff(out.clip, video_mixup(a, b, out.record.lambda)) == 0.0);
    CHECK(out.record.variant == MixVariant::VideoMixup);
    CHECK_THROWS_AS(video_mixup(a, random_clip(2, 4, 4, 4, rng), 0.5), DimensionError);
  }

  TEST_CASE("cutmix with forced regions") {
    Rng rng(9);
    const VideoClip a = random_clip(2, 3, 4, 4, rng), b = random_clip(2, 3, 4, 4, rng);
    std::vector<CutRegion> empty(3, CutRegion{1, 1, 0, 0, 0});
    CHECK(video_cutmix(a, b, empty) == a);

    std::vector<CutRegion> regions(3, CutRegion{0, 0, 0, 0, 0});
    regions[1] = CutRegion{0, 0, 4, 4, 2};
    const VideoClip y = video_cutmix(a, b, regions);
    for (Index c = 0; c < 2; ++c)
      for (Index h = 0; h < 4; ++h)
        for (Index w = 0; w < 4; ++w) {
          CHECK(y.at(c, 1, h, w) == b.at(c, 2, h, w));
          CHECK(y.at(c, 0, h, w) == a.at(c, 0, h, w));
        }
    std::vector<CutRegion> too_big(3, CutRegion{2, 2, 3, 1, 0});
    CHECK_THROWS_AS(video_cutmix(a, b, too_big), ArgumentError);
  }

  TEST_CASE("cutmix output cells come from one of the two clips") {
    Rng rng(10);
    const VideoClip a = random_clip(2, 4, 8, 8, rng), b = random_clip(2, 4, 8, 8, rng);
    for (int trial = 0; trial < 50; ++trial) {
      const Augmented out = video_cutmix(a, b, rng);
      CHECK(out.record.lambda >= 0.05);
      CHECK(out.record.lambda <= 0.55);
      Index replaced = 0;
      for (Index t = 0; t < 4; ++t)
        for (Index h = 0; h < 8; ++h)
          for (Index w = 0; w < 8; ++w) {
            bool from_a = true, from_b = false;
            for (Index c = 0; c < 2; ++c) from_a = from_a && out.clip.at(c, t, h, w) == a.at(c, t, h, w);
            for (Index s = 0; s < 4 && !from_a && !from_b; ++s) {
              bool all = true;
              for (Index c = 0; c < 2; ++c) all = all && out.clip.at(c, t, h, w) == b.at(c, s, h, w);
              from_b = all;
            }
            REQUIRE((from_a || from_b));
            replaced += from_b;
          }
      CHECK(replaced > 0);
    }
  }

  TEST_CASE("gaussian noise adds one field to every frame") {
    Rng rng(12);
    const VideoClip zero(2, 5, 4, 4);
    const VideoClip noisy = gaussian_noise(zero, 0.3, rng).clip;
    const VideoClip x = random_clip(2, 5, 4, 4, rng);
    Rng same(99);
    const VideoClip y = gaussian_noise(x, 0.3, same).clip;
    for (Index c = 0; c < 2; ++c)
      for (Index h = 0; h < 4; ++h)
        for (Index w = 0; w < 4; ++w) {
          const double d0 = noisy.at(c, 0, h, w);
          const double e0 = y.at(c, 0, h, w) - x.at(c, 0, h, w);
          for (Index t = 1; t < 5; ++t) {
            CHECK(noisy.at(c, t, h, w) == d0);
            CHECK(std::abs((y.at(c, t, h, w) - x.at(c, t, h, w)) - e0) <= 1e-14);
          }
        }
  }

  TEST_CASE("gaussian noise edge cases and spread") {
    Rng rng(13);
    const VideoClip x = random_clip(1, 3, 4, 4, rng);
    CHECK(gaussian_noise(x, 0.0, rng).clip == x);
    CHECK_THROWS_AS(gaussian_noise(x, -1.0, rng), ArgumentError);

    const double sigma = 0.7;
    const VideoClip zero(1, 1, 250, 400);
    const Tensor field = gaussian_noise(zero, sigma, rng).clip.tensor();
    const double mean = field.data().mean();
    const double var = (field.data().array() - mean).square().mean();
    CHECK(std::abs(std::sqrt(var) - sigma) / sigma < 0.02);
  }

  TEST_CASE("beta with alpha one is uniform") {
    Rng rng(14);
    std::vector<double> draws(10000);
    for (auto& d : draws) d = sample_symmetric_beta(1.0, rng);
    CHECK(ks_uniform(draws) < 0.02);
    CHECK_THROWS_AS(sample_symmetric_beta(0.0, rng), ArgumentError);
  }

  TEST_CASE("every variant is deterministic per seed and shape-preserving") {
    Rng data(15);
    const VideoClip a = random_clip(2, 4, 6, 6, data), b = random_clip(2, 4, 6, 6, data);
    auto run = [&](std::uint64_t seed) {
      Rng rng(seed);
      return std::vector<VideoClip>{intra_video_mixup(a, 1.0, rng).clip, inter_video_mixup(a, b, 1.0, rng).clip,
                                    video_mixup(a, b, 1.0, rng).clip, video_cutmix(a, b, rng).clip,
                                    gaussian_noise(a, 0.1, rng).clip};
    };
    const auto first = run(5), second = run(5);
    CHECK(first == second);
    for (const auto& c : first) CHECK(c.shape() == a.shape());
  }
}
