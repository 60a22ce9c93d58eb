#pragma once

#include <string>
#include <vector>

#include "stcr/clip.hpp"

namespace stcr {

/// Clip file: "VCLP", u32 version 1, u32 C, T, H, W, then C*T*H*W
/// little-endian float32 values in (c, t, h, w) order.
void write_clip(const std::string& path, const VideoClip& clip);
VideoClip read_clip(const std::string& path);

/// Bytes the payload of a C x T x H x W clip occupies.
std::size_t clip_payload_bytes(Index c, Index t, Index h, Index w);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  int label = 0;
};

struct Manifest {
  std::string directory;
  std::vector<ManifestEntry> entries;

  std::string resolve(const ManifestEntry& e) const;
};

/// One "relative-path<TAB>label" record per line.
Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

struct LabeledClip {
  VideoClip clip;
  int label = 0;
};

std::vector<LabeledClip> load_dataset(const Manifest& manifest);

}  // namespace stcr
