#pragma once

#include <string>

#include "stcr/model.hpp"
#include "stcr/synthetic.hpp"
#include "stcr/train.hpp"

namespace stcr {

struct EvalConfig {
  int probe_epochs = 500;
  double probe_lr = 0.5;
  int retrieval_k = 1;
};

/// One JSON document with optional "model", "train", "data" and "eval"
/// sections. Missing fields keep their defaults; unknown keys are errors.
struct AppConfig {
  BackboneConfig model;
  TrainConfig train;
  SyntheticSpec data;
  EvalConfig eval;

  /// Cross-section checks (crop vs backbone input, per-section invariants).
  void validate() const;
};

AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::string& path);

}  // namespace stcr
