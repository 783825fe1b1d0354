#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "vistrip/trainer.hpp"

namespace vistrip::train {

/// `key = value` lines with `#` comments, one key per line. Keys:
///   task, mixed, stack, channels, heads, frames, variant, direction,
///   global_residual, crop, source, batch, steps, lr, lr_final, lambda,
///   epsilon, charbonnier, clip, seed, val_every, val_sequences, threads
using KeyValues = std::map<std::string, std::string>;

/// Parses text into key/value pairs. Unknown keys and duplicates are
/// rejected; errors carry `origin:line`.
KeyValues parse_key_values(const std::string& text, const std::string& origin);

/// Overlays `kv` onto `base` and validates the result.
TrainConfig apply_key_values(TrainConfig base, const KeyValues& kv);

/// Reads a config file on top of the defaults. An empty file gives the defaults.
TrainConfig parse_config(const std::filesystem::path& path);
TrainConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Every key with its resolved value; parse_config_text(to_text(c)) == c.
std::string to_text(const TrainConfig& c);

}  // namespace vistrip::train
