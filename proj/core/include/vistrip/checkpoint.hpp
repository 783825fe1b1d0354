#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vistrip/model.hpp"

namespace vistrip::model {

// Checkpoint layout (little-endian):
//   "VSCK" | u32 version (=1) | u32 config_bytes | config text (key = value lines)
//   u32 entry_count | entry_count x { u16 name_len | name | u64 offset | u8 rank | rank x u64 extents }
//   VSTF records, one per entry, at the recorded absolute offsets.
struct CheckpointEntry {
  std::string name;
  std::uint64_t offset = 0;
  Shape shape;
};

struct Checkpoint {
  ModelConfig config;
  ModelWeights weights;
};

std::string serialize_model_config(const ModelConfig& c);
ModelConfig deserialize_model_config(const std::string& text);

/// Writes atomically (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelWeights& w);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::vector<CheckpointEntry> read_checkpoint_index(const std::filesystem::path& path);

}  // namespace vistrip::model
