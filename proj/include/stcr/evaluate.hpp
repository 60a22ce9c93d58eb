#pragma once

#include <span>
#include <vector>

#include "stcr/io.hpp"
#include "stcr/model.hpp"

namespace stcr {

/// One feature vector per row.
struct FeatureSet {
  RowMatrixXd features;
  std::vector<int> labels;
};

/// Flattened spatially max-pooled feature (C' * T') of the centre crop.
VectorXd clip_features(const BackboneConfig& config, const ModelParams& params, const VideoClip& video);
FeatureSet extract_features(const BackboneConfig& config, const ModelParams& params,
                            std::span<const LabeledClip> data);

/// Softmax regression trained by full-batch gradient descent on
/// standardized features. Returns accuracy on `test`.
double linear_probe(const FeatureSet& train, const FeatureSet& test, int epochs, double lr);

/// Fraction of queries with a same-label item among their k nearest gallery
/// items under cosine similarity. With `exclude_self`, gallery item i is
/// skipped for query i (query and gallery are the same set).
double retrieval_eval(const FeatureSet& queries, const FeatureSet& gallery, int k, bool exclude_self = false);

}  // namespace stcr
