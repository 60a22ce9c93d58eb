#include "stcr/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "stcr/train.hpp"

namespace stcr {

VectorXd clip_features(const BackboneConfig& config, const ModelParams& params, const VideoClip& video) {
  const Triple crop{config.input_shape[1], config.input_shape[2], config.input_shape[3]};
  const Var feature = backbone_forward(config, params, center_crop(video, crop));
  return psi_pool(feature)->value.data();
}

FeatureSet extract_features(const BackboneConfig& config, const ModelParams& params,
                            std::span<const LabeledClip> data) {
  FeatureSet set;
  if (data.empty()) return set;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const VectorXd f = clip_features(config, params, data[i].clip);
    if (i == 0) set.features.resize(static_cast<Index>(data.size()), f.size());
    set.features.row(static_cast<Index>(i)) = f.transpose();
    set.labels.push_back(data[i].label);
  }
  return set;
}

double linear_probe(const FeatureSet& train, const FeatureSet& test, int epochs, double lr) {
  if (train.features.rows() == 0 || test.features.rows() == 0) throw ArgumentError("linear_probe: empty feature set");
  if (train.features.cols() != test.features.cols()) throw DimensionError("linear_probe: feature lengths differ");
  const std::set<int> classes(train.labels.begin(), train.labels.end());
  if (classes.size() < 2) throw ArgumentError("linear_probe: needs at least two classes");
  if (*classes.begin() < 0) throw ArgumentError("linear_probe: labels must be non-negative");
  const Index n_classes = *classes.rbegin() + 1;
  const Index n = train.features.rows();
  const Index d = train.features.cols();

  const Eigen::RowVectorXd mean = train.features.colwise().mean();
  Eigen::RowVectorXd stddev = (train.features.rowwise() - mean).array().square().colwise().mean().sqrt();
  stddev = (stddev.array() > 1e-12).select(stddev, 1.0);
  const auto standardize = [&](const RowMatrixXd& x) -> RowMatrixXd {
    return (x.rowwise() - mean).array().rowwise() / stddev.array();
  };
  const RowMatrixXd X = standardize(train.features);
  RowMatrixXd onehot = RowMatrixXd::Zero(n, n_classes);
  for (Index i = 0; i < n; ++i) onehot(i, train.labels[static_cast<std::size_t>(i)]) = 1.0;

  RowMatrixXd W = RowMatrixXd::Zero(d, n_classes);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(n_classes);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    RowMatrixXd logits = (X * W).rowwise() + b;
    logits = logits.colwise() - logits.rowwise().maxCoeff();
    RowMatrixXd prob = logits.array().exp();
    prob = prob.array().colwise() / prob.rowwise().sum().array();
    const RowMatrixXd delta = (prob - onehot) / static_cast<double>(n);
    W -= lr * (X.transpose() * delta);
    b -= lr * delta.colwise().sum();
  }

  const RowMatrixXd scores = (standardize(test.features) * W).rowwise() + b;
  Index correct = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    scores.row(i).maxCoeff(&best);
    if (best == test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.rows());
}

double retrieval_eval(const FeatureSet& queries, const FeatureSet& gallery, int k, bool exclude_self) {
  if (k < 1) throw ArgumentError("retrieval_eval: k must be >= 1");
  if (queries.features.cols() != gallery.features.cols()) throw DimensionError("retrieval_eval: feature lengths differ");
  const Index candidates = gallery.features.rows() - (exclude_self ? 1 : 0);
  if (k > candidates) {
    throw ArgumentError("retrieval_eval: k = " + std::to_string(k) + " exceeds gallery size " +
                        std::to_string(candidates));
  }
  if (exclude_self && queries.features.rows() != gallery.features.rows()) {
    throw ArgumentError("retrieval_eval: self exclusion needs query and gallery to be the same set");
  }
  const auto normalized = [](const RowMatrixXd& x) -> RowMatrixXd {
    Eigen::VectorXd norms = x.rowwise().norm();
    norms = (norms.array() > 0.0).select(norms, 1.0);
    return x.array().colwise() / norms.array();
  };
  const RowMatrixXd sim = normalized(queries.features) * normalized(gallery.features).transpose();

  Index hits = 0;
  std::vector<Index> order;
  for (Index q = 0; q < sim.rows(); ++q) {
    order.clear();
    for (Index g = 0; g < sim.cols(); ++g) {
      if (!(exclude_self && g == q)) order.push_back(g);
    }
    // Ties resolve to the lower gallery index.
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return sim(q, a) > sim(q, b) || (sim(q, a) == sim(q, b) && a < b);
    });
    const int label = queries.labels[static_cast<std::size_t>(q)];
    if (std::any_of(order.begin(), order.begin() + k,
                    [&](Index g) { return gallery.labels[static_cast<std::size_t>(g)] == label; })) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(sim.rows());
}

}  // namespace stcr
