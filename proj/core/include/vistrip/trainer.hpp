#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vistrip/evaluate.hpp"
#include "vistrip/losses.hpp"
#include "vistrip/model.hpp"
#include "vistrip/optimizer.hpp"
#include "vistrip/synth.hpp"

namespace vistrip::train {

struct TrainConfig {
  model::ModelConfig model = model::ModelConfig::with_base(16, 2, 8);
  synth::DegradationKind task = synth::DegradationKind::Blur;
  bool mixed_orientation = false;

  std::size_t crop = 48;
  /// Side of the generated frames the crops are taken from; 0 means crop + 16.
  std::size_t source_size = 0;
  std::size_t batch = 2;
  std::size_t steps = 400;
  double lr = 1e-4;
  double lr_final = 1e-7;
  loss::LossConfig loss;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;

  /// Validation every `val_every` steps (0: only after the last step).
  std::size_t val_every = 100;
  std::size_t val_sequences = 4;
  /// Worker threads for the batch (0: thread budget).
  std::size_t threads = 0;

  std::size_t frames() const { return model.frame_window; }
  std::size_t source() const { return source_size ? source_size : crop + 16; }
  /// Throws ConfigError; messages name the offending keys.
  void validate() const;
};

struct StepLog {
  std::size_t step = 0;
  std::string split;  ///< "train" or "val"
  double psnr_db = 0.0;
  double ssim = 0.0;
  loss::LossReport loss;
};

struct TrainResult {
  std::size_t steps_run = 0;
  bool aborted = false;
  std::string abort_reason;
  /// Batch-mean total loss of every step, index = step - 1.
  std::vector<double> train_loss;
  std::vector<StepLog> log;
  eval::ClipScore val_baseline;
  eval::ClipScore val_final;
  double best_val_total = 0.0;
  std::size_t best_step = 0;
  double seconds = 0.0;
  model::ModelWeights weights;
};

using Progress = std::function<void(const StepLog&)>;

/// CSV header and row format of the metrics log.
std::string metrics_csv_header();
std::string metrics_csv_row(const StepLog& row);

/// Held-out clips for a config: independent of the training stream.
std::vector<eval::ClipPair> validation_set(const TrainConfig& cfg);
/// Training pair `item` of step `step` (augmented crop of a fresh clip).
eval::ClipPair training_pair(const TrainConfig& cfg, std::size_t step, std::size_t item);

/// Runs training. With a non-empty `run_dir`, writes metrics.csv,
/// config.txt, last.vsck and best.vsck there. A non-finite loss or gradient
/// stops the run before any update is applied; the last checkpoint on disk
/// then holds the final finite weights.
TrainResult train(const TrainConfig& cfg, const std::filesystem::path& run_dir = {}, const Progress& progress = {});

}  // namespace vistrip::train
