#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "stcr/autodiff.hpp"
#include "stcr/random.hpp"

namespace stcr {

/// Flip component. Bit 0 reverses W, bit 1 reverses T.
enum class Flip : std::uint8_t { None = 0, LeftRight = 1, Temporal = 2, TemporalLeftRight = 3 };

/// Counter-clockwise quarter turns in the H x W plane.
enum class Rotation : std::uint8_t { R0 = 0, R90 = 1, R180 = 2, R270 = 3 };

/// One of the 16 flip x rotation elements. Acting on a clip it flips first and
/// rotates second.
struct TransformId {
  Flip flip = Flip::None;
  Rotation rotation = Rotation::R0;

  static constexpr int kCount = 16;

  static constexpr TransformId identity() { return {}; }
  /// Fixed enumeration: index = 4 * flip + rotation, so indices 0-7 keep
  /// temporal order and i + 8 is i with the temporal flip added.
  static TransformId from_index(int index);
  constexpr int index() const { return 4 * static_cast<int>(flip) + static_cast<int>(rotation); }

  constexpr bool mirrors_width() const { return (static_cast<int>(flip) & 1) != 0; }
  constexpr bool reverses_time() const { return (static_cast<int>(flip) & 2) != 0; }
  constexpr int quarter_turns() const { return static_cast<int>(rotation); }

  friend constexpr auto operator<=>(const TransformId&, const TransformId&) = default;
};

std::array<TransformId, TransformId::kCount> all_transforms();

/// "flip,rotation" as two integers in 0..3.
std::string to_string(TransformId t);

TransformId stt_sample(Rng& rng);

/// Applies t to a C x T x H x W clip. Pure permutation of entries.
Tensor stt_apply_clip(const Tensor& clip, TransformId t);

/// Same geometric action on a differentiable feature map.
Var stt_apply_feature(const Var& feature, TransformId t);

/// Undoes t on a feature map: inverse rotation, then the flip again.
Var stt_apply_feature_inverse(const Var& feature, TransformId t);

/// Element equal to applying t1 and then t2.
TransformId stt_compose(TransformId t1, TransformId t2);
TransformId stt_inverse(TransformId t);

}  // namespace stcr
