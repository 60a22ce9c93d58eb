#pragma once

#include "stcr/tensor.hpp"

namespace stcr {

/// C x T x H x W clip with finite entries.
class VideoClip {
 public:
  VideoClip() = default;
  explicit VideoClip(Tensor values);
  VideoClip(Index c, Index t, Index h, Index w, double fill = 0.0)
      : VideoClip(Tensor(Shape{c, t, h, w}, fill)) {}

  const Tensor& tensor() const { return values_; }
  Tensor& tensor() { return values_; }
  const Shape& shape() const { return values_.shape(); }

  Index channels() const { return values_.dim(0); }
  Index frames() const { return values_.dim(1); }
  Index height() const { return values_.dim(2); }
  Index width() const { return values_.dim(3); }
  Index frame_size() const { return height() * width(); }

  double& at(Index c, Index t, Index h, Index w) { return values_.at(c, t, h, w); }
  double at(Index c, Index t, Index h, Index w) const { return values_.at(c, t, h, w); }

  friend bool operator==(const VideoClip&, const VideoClip&) = default;

 private:
  Tensor values_;
};

void require_same_clip_shape(const VideoClip& a, const VideoClip& b, const char* op);

}  // namespace stcr
