#include <map>

#include "binary_io.hpp"
#include "stcr/model.hpp"

namespace stcr {

namespace {
constexpr char kMagic[4] = {'S', 'T', 'C', 'R'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  detail::ByteWriter out;
  out.bytes(kMagic, 4);
  out.u32(kVersion);
  for (const auto& [name, t] : params.named()) {
    out.u32(static_cast<std::uint32_t>(name.size()));
    out.bytes(name.data(), name.size());
    out.u32(static_cast<std::uint32_t>(t->rank()));
    for (Index d : t->shape()) out.u32(static_cast<std::uint32_t>(d));
    for (double v : t->values()) out.f64(v);
  }
  detail::write_file_bytes(path, out.buffer());
}

ModelParams load_checkpoint(const std::string& path, const BackboneConfig& config) {
  detail::ByteReader in(detail::read_file_bytes(path), "checkpoint " + path);
  char magic[4];
  in.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("checkpoint " + path + ": bad magic", 0);
  if (const auto version = in.u32("version"); version != kVersion) {
    throw FormatError("checkpoint " + path + ": unsupported version " + std::to_string(version), 4);
  }

  std::map<std::string, Tensor> records;
  while (!in.at_end()) {
    const std::size_t record_start = in.offset();
    std::string name(in.u32("name length"), '\0');
    in.bytes(name.data(), name.size(), "name");
    const std::uint32_t rank = in.u32("rank");
    if (rank > 8) throw FormatError("checkpoint " + path + ": implausible rank for " + name, record_start);
    Shape shape(rank);
    for (auto& d : shape) {
      d = in.u32("dimension");
      if (d < 1) throw FormatError("checkpoint " + path + ": zero dimension in " + name, in.offset() - 4);
    }
    in.need(static_cast<std::size_t>(numel(shape)) * 8, "tensor data");
    Tensor t(shape);
    for (auto& v : t.values()) v = in.f64("tensor data");
    records.emplace(std::move(name), std::move(t));
  }

  // Shapes come from the configuration; every one must be present.
  Rng unused(0);
  ModelParams params = init_params(config, unused);
  for (auto& [name, t] : params.named()) {
    auto it = records.find(name);
    if (it == records.end()) throw FormatError("checkpoint " + path + ": missing tensor " + name);
    if (it->second.shape() != t->shape()) {
      throw FormatError("checkpoint " + path + ": tensor " + name + " has shape " + to_string(it->second.shape()) +
                        ", configuration expects " + to_string(t->shape()));
    }
    *t = std::move(it->second);
    records.erase(it);
  }
  if (!records.empty()) throw FormatError("checkpoint " + path + ": unexpected tensor " + records.begin()->first);
  return params;
}

}  // namespace stcr
