#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vistrip/checkpoint.hpp"
#include "vistrip/losses.hpp"
#include "vistrip/metrics.hpp"

namespace vistrip::eval {

struct ClipScore {
  metrics::QualityMetrics quality;
  loss::LossReport loss;
};

/// Quality and loss terms of one restored clip against its clean clip.
ClipScore score_clip(const Tensor& restored, const Tensor& clean, const loss::LossConfig& cfg = {});

/// Runs the model over a clip in consecutive windows of `config.frame_window`
/// frames (the last window may be shorter).
Tensor restore_clip(const Tensor& degraded, const model::ModelConfig& config, const model::ModelWeights& w);

struct SequenceResult {
  std::string name;
  std::size_t frames = 0;
  ClipScore restored;
  ClipScore baseline;  ///< degraded input scored against clean
};

struct EvalReport {
  std::vector<SequenceResult> sequences;
  /// Unweighted means over sequences.
  ClipScore mean_restored;
  ClipScore mean_baseline;
  /// Manifest entries whose files could not be read, with the reason.
  std::vector<std::string> missing;
};

struct ClipPair {
  std::string name;
  Tensor clean;
  Tensor degraded;
};

EvalReport evaluate_pairs(const std::vector<ClipPair>& pairs, const model::ModelConfig& config,
                          const model::ModelWeights& w, const loss::LossConfig& cfg = {});

/// Loads the checkpoint and every sequence listed in the manifest
/// (`clean_dir degraded_dir` per line, relative to the manifest). Unreadable
/// entries are recorded in `missing` and skipped.
EvalReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                    const loss::LossConfig& cfg = {});

/// Per-sequence rows plus a mean row, as CSV.
std::string report_csv(const EvalReport& r);

}  // namespace vistrip::eval
