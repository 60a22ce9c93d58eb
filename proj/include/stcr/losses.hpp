#pragma once

#include <utility>

#include "stcr/autodiff.hpp"
#include "stcr/model.hpp"
#include "stcr/transform.hpp"

namespace stcr {

inline constexpr double kDefaultGamma = 0.1;

struct LossReport {
  double l_tw = 0.0;
  double l_cw = 0.0;
  double total = 0.0;
  double gamma = kDefaultGamma;
};

/// Mean squared error between the clean descriptor and the re-aligned noise descriptor.
Var loss_tw(const Var& d_clean, const Var& d_noise_aligned);

/// KL(P_clean || Q_noise) over channel logits.
Var loss_cw(const Var& logits_clean, const Var& logits_noise);

/// total = l_tw + gamma * l_cw.
std::pair<Var, LossReport> loss_total(const Var& l_tw, const Var& l_cw, double gamma = kDefaultGamma);

/// Intermediate values of one siamese evaluation.
struct SiameseOutputs {
  Var feature_clean, feature_noise;
  Var descriptor_clean, descriptor_noise;  // noise descriptor already re-aligned
  Var logits_clean, logits_noise;
  Var l_tw, l_cw, total;
  LossReport report;
};

/// Both paths through shared weights: x_clean as is, x_noise already
/// transformed by `t` and mixed. The noise feature is re-aligned with t^-1
/// before pooling.
SiameseOutputs siamese_loss(const BackboneConfig& config, const ModelVars& vars, const Var& x_clean,
                            const Var& x_noise, TransformId t, double gamma);

}  // namespace stcr
