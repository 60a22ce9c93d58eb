#include "stcr/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

namespace stcr {

namespace {

constexpr std::pair<Motion, const char*> kMotionNames[] = {
    {Motion::TranslateRight, "translate-right"}, {Motion::TranslateLeft, "translate-left"},
    {Motion::TranslateUp, "translate-up"},       {Motion::TranslateDown, "translate-down"},
    {Motion::Clockwise, "clockwise-orbit"},      {Motion::CounterClockwise, "counter-clockwise-orbit"},
};

Index wrap(Index v, Index n) { return ((v % n) + n) % n; }

}  // namespace

std::string to_string(Motion m) {
  for (const auto& [motion, name] : kMotionNames) {
    if (motion == m) return name;
  }
  return "unknown";
}

Motion parse_motion(const std::string& name) {
  for (const auto& [motion, n] : kMotionNames) {
    if (name == n) return motion;
  }
  throw ConfigError("unknown motion class '" + name + "'");
}

void SyntheticSpec::validate() const {
  if (num_clips < 0) throw ConfigError("data: num_clips must be >= 0");
  if (classes.empty()) throw ConfigError("data: at least one class is required");
  if (shape.size() != 4 || shape[0] < 1 || shape[1] < 1 || shape[2] < 1 || shape[3] < 1) {
    throw ConfigError("data: shape must be four positive sizes");
  }
  if (square_size < 1 || square_size > shape[2] || square_size > shape[3]) {
    throw ConfigError("data: square_size must fit in the frame");
  }
  if (!(texture_noise >= 0.0)) throw ConfigError("data: texture_noise must be >= 0");
  if (!(orbit_radius >= 0.0)) throw ConfigError("data: orbit_radius must be >= 0");
}

std::pair<Index, Index> motion_offset(const SyntheticSpec& spec, Motion motion, double phase, Index t) {
  switch (motion) {
    case Motion::TranslateRight: return {0, spec.speed * t};
    case Motion::TranslateLeft: return {0, -spec.speed * t};
    case Motion::TranslateUp: return {-spec.speed * t, 0};
    case Motion::TranslateDown: return {spec.speed * t, 0};
    case Motion::Clockwise:
    case Motion::CounterClockwise: {
      // Counter-clockwise on screen means the angle grows while h points down.
      const double omega = 2.0 * std::numbers::pi / static_cast<double>(spec.shape[1]);
      const double angle = phase + (motion == Motion::CounterClockwise ? omega : -omega) * static_cast<double>(t);
      const double r = spec.orbit_radius;
      const auto dh = std::lround(-r * std::sin(angle)) - std::lround(-r * std::sin(phase));
      const auto dw = std::lround(r * std::cos(angle)) - std::lround(r * std::cos(phase));
      return {static_cast<Index>(dh), static_cast<Index>(dw)};
    }
  }
  return {0, 0};
}

VideoClip render_motion(const SyntheticSpec& spec, const MotionSample& sample, Rng& noise_rng) {
  const Index C = spec.shape[0], T = spec.shape[1], H = spec.shape[2], W = spec.shape[3];
  const Index s = spec.square_size;
  if (sample.texture.shape() != Shape{C, s, s}) throw DimensionError("render_motion: texture must be C x s x s");
  VideoClip clip(C, T, H, W);
  if (sample.noise > 0.0) {
    std::normal_distribution<double> normal(0.0, sample.noise);
    for (auto& v : clip.tensor().values()) v = normal(noise_rng);
  }
  for (Index t = 0; t < T; ++t) {
    const auto [dh, dw] = motion_offset(spec, sample.motion, sample.phase, t);
    for (Index c = 0; c < C; ++c)
      for (Index i = 0; i < s; ++i)
        for (Index j = 0; j < s; ++j) {
          clip.at(c, t, wrap(sample.start_h + dh + i, H), wrap(sample.start_w + dw + j, W)) +=
              sample.texture[(c * s + i) * s + j];
        }
  }
  return clip;
}

LabeledClip synthesize_clip(const SyntheticSpec& spec, int index) {
  const int label = index % static_cast<int>(spec.classes.size());
  Rng rng = derive_rng(spec.seed, {static_cast<std::uint64_t>(index)});
  MotionSample sample;
  sample.motion = spec.classes[static_cast<std::size_t>(label)];
  sample.start_h = std::uniform_int_distribution<Index>(0, spec.shape[2] - 1)(rng);
  sample.start_w = std::uniform_int_distribution<Index>(0, spec.shape[3] - 1)(rng);
  sample.phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  sample.texture = Tensor(Shape{spec.shape[0], spec.square_size, spec.square_size});
  std::uniform_real_distribution<double> texel(0.5, 1.5);
  for (auto& v : sample.texture.values()) v = texel(rng);
  sample.noise = spec.texture_noise;
  VideoClip clip = render_motion(spec, sample, rng);
  // Stored as float32 on disk; keep the in-memory clip identical to the file.
  for (auto& v : clip.tensor().values()) v = static_cast<float>(v);
  return {std::move(clip), label};
}

Manifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  Manifest manifest;
  manifest.directory = out_dir;
  for (int i = 0; i < spec.num_clips; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%05d.vclp", i);
    const LabeledClip lc = synthesize_clip(spec, i);
    manifest.entries.push_back({name, lc.label});
    write_clip(manifest.resolve(manifest.entries.back()), lc.clip);
  }
  write_manifest((std::filesystem::path(out_dir) / "manifest.tsv").string(), manifest.entries);
  return manifest;
}

}  // namespace stcr
