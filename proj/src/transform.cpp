#include "stcr/transform.hpp"

#include <memory>

namespace stcr {

namespace {

struct Coord {
  Index t, h, w;
};

// Source coordinate of output cell (h, w) after `k` counter-clockwise quarter
// turns of an H x W plane.
Coord rotation_source(Coord out, int k, Index H, Index W) {
  switch (k & 3) {
    case 0: return out;
    case 1: return {out.t, out.w, W - 1 - out.h};
    case 2: return {out.t, H - 1 - out.h, W - 1 - out.w};
    default: return {out.t, H - 1 - out.w, out.h};
  }
}

Coord flip_source(Coord out, Flip flip, Index T, Index W) {
  const int bits = static_cast<int>(flip);
  if (bits & 1) out.w = W - 1 - out.w;
  if (bits & 2) out.t = T - 1 - out.t;
  return out;
}

void require_rotatable(const Shape& shape, int quarter_turns, const char* op) {
  if (shape.size() != 4) {
    throw DimensionError(std::string(op) + ": expected C x T x H x W, got " + to_string(shape));
  }
  if ((quarter_turns & 1) && shape[2] != shape[3]) {
    throw DimensionError(std::string(op) + ": quarter-turn rotation needs H == W, got H=" +
                         std::to_string(shape[2]) + " W=" + std::to_string(shape[3]));
  }
}

template <typename SourceOf>
std::shared_ptr<std::vector<Index>> build_map(const Shape& shape, SourceOf source_of) {
  const Index C = shape[0], T = shape[1], H = shape[2], W = shape[3];
  auto map = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(C * T * H * W));
  std::size_t i = 0;
  for (Index c = 0; c < C; ++c)
    for (Index t = 0; t < T; ++t)
      for (Index h = 0; h < H; ++h)
        for (Index w = 0; w < W; ++w) {
          const Coord s = source_of(Coord{t, h, w});
          (*map)[i++] = ((c * T + s.t) * H + s.h) * W + s.w;
        }
  return map;
}

std::shared_ptr<std::vector<Index>> forward_map(const Shape& shape, TransformId t) {
  require_rotatable(shape, t.quarter_turns(), "stt_apply");
  const Index T = shape[1], H = shape[2], W = shape[3];
  return build_map(shape, [&](Coord out) {
    return flip_source(rotation_source(out, t.quarter_turns(), H, W), t.flip, T, W);
  });
}

std::shared_ptr<std::vector<Index>> inverse_map(const Shape& shape, TransformId t) {
  require_rotatable(shape, t.quarter_turns(), "stt_apply_feature_inverse");
  const Index T = shape[1], H = shape[2], W = shape[3];
  const int undo = (4 - t.quarter_turns()) & 3;
  // out = Flip(Rot^-k(f)); the flip is an involution.
  return build_map(shape, [&](Coord out) {
    return rotation_source(flip_source(out, t.flip, T, W), undo, H, W);
  });
}

}  // namespace

TransformId TransformId::from_index(int index) {
  if (index < 0 || index >= kCount) {
    throw ArgumentError("TransformId index " + std::to_string(index) + " outside 0..15");
  }
  return {static_cast<Flip>(index / 4), static_cast<Rotation>(index % 4)};
}

std::array<TransformId, TransformId::kCount> all_transforms() {
  std::array<TransformId, TransformId::kCount> all{};
  for (int i = 0; i < TransformId::kCount; ++i) all[static_cast<std::size_t>(i)] = TransformId::from_index(i);
  return all;
}

std::string to_string(TransformId t) {
  return std::to_string(static_cast<int>(t.flip)) + "," + std::to_string(static_cast<int>(t.rotation));
}

TransformId stt_sample(Rng& rng) {
  std::uniform_int_distribution<int> pick(0, TransformId::kCount - 1);
  return TransformId::from_index(pick(rng));
}

Tensor stt_apply_clip(const Tensor& clip, TransformId t) {
  const auto map = forward_map(clip.shape(), t);
  Tensor out(clip.shape());
  for (std::size_t i = 0; i < map->size(); ++i) out[static_cast<Index>(i)] = clip[(*map)[i]];
  return out;
}

Var stt_apply_feature(const Var& feature, TransformId t) {
  return gather(feature, feature->value.shape(), forward_map(feature->value.shape(), t), "stt");
}

Var stt_apply_feature_inverse(const Var& feature, TransformId t) {
  return gather(feature, feature->value.shape(), inverse_map(feature->value.shape(), t), "stt_inverse");
}

// Spatially an element is r^k s^m with s the W-mirror, and s r^k = r^-k s.
// Applying (k1, m1) then (k2, m2) gives r^(k2 + (m2 ? -k1 : k1)) s^(m1 ^ m2).
TransformId stt_compose(TransformId t1, TransformId t2) {
  const int mirror = (static_cast<int>(t1.flip) ^ static_cast<int>(t2.flip)) & 1;
  const int time = (static_cast<int>(t1.flip) ^ static_cast<int>(t2.flip)) & 2;
  const int k1 = t1.quarter_turns();
  const int turns = (t2.quarter_turns() + (t2.mirrors_width() ? 4 - k1 : k1)) & 3;
  return {static_cast<Flip>(mirror | time), static_cast<Rotation>(turns)};
}

TransformId stt_inverse(TransformId t) {
  const int k = t.quarter_turns();
  const int turns = t.mirrors_width() ? k : (4 - k) & 3;
  return {t.flip, static_cast<Rotation>(turns)};
}

}  // namespace stcr
