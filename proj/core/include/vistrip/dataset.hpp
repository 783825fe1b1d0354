#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vistrip/synth.hpp"

namespace vistrip::data {

struct ManifestEntry {
  std::filesystem::path clean;
  std::filesystem::path degraded;
  std::size_t line = 0;
};

/// `clean_path degraded_path` per line; `#` starts a comment. Relative paths
/// resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct DatasetOptions {
  synth::DegradationKind kind = synth::DegradationKind::Blur;
  std::size_t sequences = 4;
  std::size_t frames = 4;
  std::size_t height = 48;
  std::size_t width = 48;
  std::uint64_t seed = 0;
  bool mixed_orientation = false;
};

/// Writes seq_NNN/{clean,degraded}/frame_TTT.ppm and manifest.txt under `dir`.
/// Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const DatasetOptions& opts);

/// The clip pairs `write_dataset` would write, before quantisation.
std::vector<synth::VideoPair> make_sequences(const DatasetOptions& opts);

}  // namespace vistrip::data
