#include <filesystem>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "stcr/io.hpp"

namespace stcr {

VideoClip::VideoClip(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 4) throw DimensionError("VideoClip: expected C x T x H x W, got " + to_string(values_.shape()));
  if (!values_.all_finite()) throw NumericError("VideoClip: non-finite entries");
}

void require_same_clip_shape(const VideoClip& a, const VideoClip& b, const char* op) {
  require_same_shape(a.tensor(), b.tensor(), op);
}

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace detail

namespace {
constexpr char kClipMagic[4] = {'V', 'C', 'L', 'P'};
constexpr std::uint32_t kClipVersion = 1;
constexpr std::size_t kClipHeaderBytes = 4 + 5 * 4;
}  // namespace

std::size_t clip_payload_bytes(Index c, Index t, Index h, Index w) {
  return 4 * static_cast<std::size_t>(c * t * h * w);
}

void write_clip(const std::string& path, const VideoClip& clip) {
  detail::ByteWriter out;
  out.bytes(kClipMagic, 4);
  out.u32(kClipVersion);
  for (Index d : clip.shape()) out.u32(static_cast<std::uint32_t>(d));
  for (double v : clip.tensor().values()) out.f32(static_cast<float>(v));
  detail::write_file_bytes(path, out.buffer());
}

VideoClip read_clip(const std::string& path) {
  detail::ByteReader in(detail::read_file_bytes(path), "clip " + path);
  char magic[4];
  in.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kClipMagic, 4) != 0) throw FormatError("clip " + path + ": bad magic", 0);
  if (const auto version = in.u32("version"); version != kClipVersion) {
    throw FormatError("clip " + path + ": unsupported version " + std::to_string(version), 4);
  }
  Shape shape(4);
  for (auto& d : shape) {
    d = in.u32("dimension");
    if (d < 1) throw FormatError("clip " + path + ": zero dimension", in.offset() - 4);
  }
  const std::size_t payload = clip_payload_bytes(shape[0], shape[1], shape[2], shape[3]);
  in.need(payload, "payload");
  Tensor values(shape);
  for (auto& v : values.values()) v = in.f32("payload");
  if (!in.at_end()) {
    throw FormatError("clip " + path + ": " + std::to_string(in.remaining()) + " trailing bytes",
                      kClipHeaderBytes + payload);
  }
  return VideoClip(std::move(values));
}

std::string Manifest::resolve(const ManifestEntry& e) const {
  return (std::filesystem::path(directory) / e.path).string();
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  Manifest manifest;
  manifest.directory = std::filesystem::path(path).parent_path().string();
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError("manifest " + path + ": line " + std::to_string(line_no) + " lacks path<TAB>label");
    }
    std::size_t used = 0;
    int label = 0;
    try {
      label = std::stoi(line.substr(tab + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || tab + 1 + used != line.size()) {
      throw FormatError("manifest " + path + ": line " + std::to_string(line_no) + " has a non-integer label");
    }
    manifest.entries.push_back({line.substr(0, tab), label});
  }
  return manifest;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open manifest " + path + " for writing");
  for (const auto& e : entries) out << e.path << '\t' << e.label << '\n';
  if (!out) throw IoError("write failed for manifest " + path);
}

std::vector<LabeledClip> load_dataset(const Manifest& manifest) {
  std::vector<LabeledClip> data;
  data.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) data.push_back({read_clip(manifest.resolve(e)), e.label});
  return data;
}

}  // namespace stcr
