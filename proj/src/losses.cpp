#include "stcr/losses.hpp"

namespace stcr {

Var loss_tw(const Var& d_clean, const Var& d_noise_aligned) {
  require_same_shape(d_clean->value, d_noise_aligned->value, "loss_tw");
  return mse(d_clean, d_noise_aligned);
}

Var loss_cw(const Var& logits_clean, const Var& logits_noise) {
  return softmax_kl(logits_clean, logits_noise);
}

std::pair<Var, LossReport> loss_total(const Var& l_tw, const Var& l_cw, double gamma) {
  if (!(gamma >= 0.0)) throw ArgumentError("loss_total: gamma must be >= 0");
  Var total = add(l_tw, scale(l_cw, gamma));
  LossReport report{l_tw->value.item(), l_cw->value.item(), total->value.item(), gamma};
  return {std::move(total), report};
}

SiameseOutputs siamese_loss(const BackboneConfig& config, const ModelVars& vars, const Var& x_clean,
                            const Var& x_noise, TransformId t, double gamma) {
  SiameseOutputs out;
  out.feature_clean = backbone_forward(config, vars, x_clean);
  out.feature_noise = backbone_forward(config, vars, x_noise);
  out.descriptor_clean = psi_pool(out.feature_clean);
  out.descriptor_noise = psi_pool(stt_apply_feature_inverse(out.feature_noise, t));
  out.l_tw = loss_tw(out.descriptor_clean, out.descriptor_noise);
  out.logits_clean = channel_head(vars.w_c_1, out.descriptor_clean);
  out.logits_noise = channel_head(noise_head(config, vars), out.descriptor_noise);
  out.l_cw = loss_cw(out.logits_clean, out.logits_noise);
  std::tie(out.total, out.report) = loss_total(out.l_tw, out.l_cw, gamma);
  return out;
}

}  // namespace stcr
