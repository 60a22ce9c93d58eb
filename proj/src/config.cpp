#include "stcr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stcr {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const char* name, std::initializer_list<const char*> known) {
  if (!section.is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : section.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(std::string("config: unknown key '") + item.key() + "' in '" + name + "'");
    }
  }
}

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

void read_triple(const json& section, const char* key, Triple& out) {
  if (!section.contains(key)) return;
  const auto v = section.at(key).get<std::vector<Index>>();
  if (v.size() != 3) throw ConfigError(std::string("config: '") + key + "' must have 3 entries");
  out = {v[0], v[1], v[2]};
}

void read_model(const json& j, BackboneConfig& m) {
  reject_unknown(j, "model", {"channels", "kernel", "padding", "strides", "input_shape", "tie_heads"});
  read(j, "channels", m.channels);
  read_triple(j, "kernel", m.kernel);
  read_triple(j, "padding", m.padding);
  if (j.contains("strides")) {
    m.strides.clear();
    for (const auto& s : j.at("strides")) {
      const auto v = s.get<std::vector<Index>>();
      if (v.size() != 3) throw ConfigError("config: every stride must have 3 entries");
      m.strides.push_back({v[0], v[1], v[2]});
    }
  }
  read(j, "input_shape", m.input_shape);
  read(j, "tie_heads", m.tie_heads);
}

void read_train(const json& j, TrainConfig& t) {
  reject_unknown(j, "train",
                 {"learning_rate", "weight_decay", "momentum", "epochs", "lr_decay_every", "lr_decay_factor",
                  "batch_size", "gamma", "alpha", "crop", "seed", "variant", "noise_sigma"});
  read(j, "learning_rate", t.learning_rate);
  read(j, "weight_decay", t.weight_decay);
  read(j, "momentum", t.momentum);
  read(j, "epochs", t.epochs);
  read(j, "lr_decay_every", t.lr_decay_every);
  read(j, "lr_decay_factor", t.lr_decay_factor);
  read(j, "batch_size", t.batch_size);
  read(j, "gamma", t.gamma);
  read(j, "alpha", t.alpha);
  read_triple(j, "crop", t.crop);
  read(j, "seed", t.seed);
  if (j.contains("variant")) t.variant = parse_mix_variant(j.at("variant").get<std::string>());
  read(j, "noise_sigma", t.noise_sigma);
}

void read_data(const json& j, SyntheticSpec& d) {
  reject_unknown(j, "data",
                 {"num_clips", "classes", "shape", "texture_noise", "seed", "square_size", "speed", "orbit_radius"});
  read(j, "num_clips", d.num_clips);
  if (j.contains("classes")) {
    d.classes.clear();
    for (const auto& name : j.at("classes")) d.classes.push_back(parse_motion(name.get<std::string>()));
  }
  read(j, "shape", d.shape);
  read(j, "texture_noise", d.texture_noise);
  read(j, "seed", d.seed);
  read(j, "square_size", d.square_size);
  read(j, "speed", d.speed);
  read(j, "orbit_radius", d.orbit_radius);
}

void read_eval(const json& j, EvalConfig& e) {
  reject_unknown(j, "eval", {"probe_epochs", "probe_lr", "retrieval_k"});
  read(j, "probe_epochs", e.probe_epochs);
  read(j, "probe_lr", e.probe_lr);
  read(j, "retrieval_k", e.retrieval_k);
}

}  // namespace

void AppConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  const Shape crop_shape{model.input_shape[0], train.crop[0], train.crop[1], train.crop[2]};
  if (crop_shape != model.input_shape) {
    throw ConfigError("config: train.crop " + to_string(crop_shape) + " does not match model.input_shape " +
                      to_string(model.input_shape));
  }
  if (eval.probe_epochs < 0 || !(eval.probe_lr > 0.0) || eval.retrieval_k < 1) {
    throw ConfigError("config: eval settings out of range");
  }
}

AppConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  AppConfig config;
  try {
    reject_unknown(doc, "<root>", {"model", "train", "data", "eval"});
    if (doc.contains("model")) read_model(doc.at("model"), config.model);
    if (doc.contains("train")) read_train(doc.at("train"), config.train);
    if (doc.contains("data")) read_data(doc.at("data"), config.data);
    if (doc.contains("eval")) read_eval(doc.at("eval"), config.eval);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: wrong value type: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return config;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace stcr
