#include "stcr/viz.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <limits>

#include "stcr/transform.hpp"

namespace stcr {

RowMatrixXd consistency_matrix(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip) {
  const ModelVars vars = bind_params(params, false);
  RowMatrixXd matrix;
  for (const TransformId t : all_transforms()) {
    const Var input = constant(stt_apply_clip(clip.tensor(), t));
    const Var aligned = stt_apply_feature_inverse(backbone_forward(config, vars, input), t);
    const Tensor descriptor = psi_pool(aligned)->value;  // C' x T'
    const Index channels = descriptor.dim(0), frames = descriptor.dim(1);
    if (matrix.size() == 0) matrix.resize(TransformId::kCount, frames);
    Eigen::Map<const RowMatrixXd> d(descriptor.data().data(), channels, frames);
    matrix.row(t.index()) = d.colwise().mean();
  }
  return matrix;
}

double temporal_flip_gap(const RowMatrixXd& matrix) {
  if (matrix.rows() != TransformId::kCount) throw DimensionError("temporal_flip_gap: expected 16 rows");
  return (matrix.topRows(8) - matrix.bottomRows(8)).cwiseAbs().mean();
}

void write_consistency_csv(const std::string& path, const RowMatrixXd& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "index,flip,rotation";
  for (Index t = 0; t < matrix.cols(); ++t) out << ",t" << t;
  out << '\n';
  char buf[32];
  for (Index r = 0; r < matrix.rows(); ++r) {
    const TransformId t = TransformId::from_index(static_cast<int>(r));
    out << r << ',' << to_string(t);
    for (Index c = 0; c < matrix.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

RowMatrixXd viz_consistency_matrix(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip,
                                   const std::string& out_csv) {
  RowMatrixXd matrix = consistency_matrix(config, params, clip);
  write_consistency_csv(out_csv, matrix);
  return matrix;
}

ByteImage heatmap_from_feature(const Tensor& feature, Index height, Index width) {
  if (feature.rank() != 4) throw DimensionError("heatmap: feature must be C' x T' x H' x W'");
  if (height < 1 || width < 1) throw ArgumentError("heatmap: output size must be positive");
  const Index C = feature.dim(0), T = feature.dim(1), H = feature.dim(2), W = feature.dim(3);

  RowMatrixXd mean = RowMatrixXd::Zero(height, width);
  for (Index c = 0; c < C; ++c) {
    RowMatrixXd peak = RowMatrixXd::Constant(H, W, -std::numeric_limits<double>::infinity());
    for (Index t = 0; t < T; ++t)
      for (Index h = 0; h < H; ++h)
        for (Index w = 0; w < W; ++w) peak(h, w) = std::max(peak(h, w), feature.at(c, t, h, w));
    for (Index y = 0; y < height; ++y)
      for (Index x = 0; x < width; ++x) mean(y, x) += peak(y * H / height, x * W / width);
  }
  mean /= static_cast<double>(C);

  const double lo = mean.minCoeff(), hi = mean.maxCoeff();
  if (!(hi > lo)) return ByteImage::Constant(height, width, 128);
  return ((mean.array() - lo) * (255.0 / (hi - lo))).round().cast<std::uint8_t>();
}

void write_pgm(const std::string& path, const ByteImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  if (!out) throw IoError("write failed for " + path);
}

ByteImage viz_heatmap(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip,
                      const std::string& out_pgm) {
  const Tensor feature = backbone_forward(config, params, clip)->value;
  ByteImage image = heatmap_from_feature(feature, clip.height(), clip.width());
  write_pgm(out_pgm, image);
  return image;
}

}  // namespace stcr
