#pragma once

#include <string>
#include <vector>

#include "stcr/io.hpp"
#include "stcr/random.hpp"

namespace stcr {

enum class Motion { TranslateRight, TranslateLeft, TranslateUp, TranslateDown, Clockwise, CounterClockwise };

std::string to_string(Motion m);
Motion parse_motion(const std::string& name);

/// Moving-square dataset where only the trajectory encodes the class.
struct SyntheticSpec {
  int num_clips = 200;
  std::vector<Motion> classes{Motion::TranslateRight, Motion::TranslateLeft, Motion::TranslateUp,
                              Motion::TranslateDown,  Motion::Clockwise,     Motion::CounterClockwise};
  Shape shape{3, 8, 16, 16};
  double texture_noise = 0.1;
  std::uint64_t seed = 0;
  Index square_size = 4;
  Index speed = 1;             // pixels per frame for translations
  double orbit_radius = 3.0;   // pixels; one full turn per clip

  void validate() const;
};

/// Everything needed to render one clip. Positions wrap around the frame
/// edges, so every start position is valid for every motion.
struct MotionSample {
  Motion motion = Motion::TranslateRight;
  Index start_h = 0, start_w = 0;
  double phase = 0.0;   // orbit start angle
  Tensor texture;       // C x s x s
  double noise = 0.0;   // background noise standard deviation
};

/// (dh, dw) of the square at frame t relative to frame 0.
std::pair<Index, Index> motion_offset(const SyntheticSpec& spec, Motion motion, double phase, Index t);

VideoClip render_motion(const SyntheticSpec& spec, const MotionSample& sample, Rng& noise_rng);

/// Clip i with label i % classes.size(), drawn from derive_rng(seed, {i}).
LabeledClip synthesize_clip(const SyntheticSpec& spec, int index);

/// Writes clip_XXXXX.vclp files plus manifest.tsv into out_dir.
Manifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

}  // namespace stcr
