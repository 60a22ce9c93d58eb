#pragma once

#include <cstdint>
#include <string>

#include "stcr/model.hpp"

namespace stcr {

using ByteImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row i (TransformId::from_index(i)): transform the clip, run the backbone,
/// undo the transform on the feature, spatially max-pool, then average over
/// channels. Result is 16 x T'.
RowMatrixXd consistency_matrix(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip);

/// Mean |row i - row i+8| over i in 0..7: the temporal-flip consistency gap.
double temporal_flip_gap(const RowMatrixXd& matrix);

/// CSV with columns index,flip,rotation,t0..t{T'-1}.
void write_consistency_csv(const std::string& path, const RowMatrixXd& matrix);
RowMatrixXd viz_consistency_matrix(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip,
                                   const std::string& out_csv);

/// Temporal max per channel, nearest-neighbour upscaling to height x width,
/// channel mean, min-max scaling to 0..255. A constant map becomes 128.
ByteImage heatmap_from_feature(const Tensor& feature, Index height, Index width);

/// Binary PGM (P5).
void write_pgm(const std::string& path, const ByteImage& image);
ByteImage viz_heatmap(const BackboneConfig& config, const ModelParams& params, const VideoClip& clip,
                      const std::string& out_pgm);

}  // namespace stcr
