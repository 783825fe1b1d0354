#include "vistrip/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vistrip/augment.hpp"
#include "vistrip/checkpoint.hpp"
#include "vistrip/dataset.hpp"
#include "vistrip/parallel.hpp"
#include "vistrip/run_config.hpp"
#include "vistrip/vstf.hpp"

namespace vistrip::train {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kTrainStream = 0x74726169;
constexpr std::uint64_t kValStream = 0x76616c69;

struct ItemResult {
  model::ModelWeights grads;
  loss::LossReport loss;
  metrics::QualityMetrics quality;
  bool finite = false;
};

ItemResult run_item(const TrainConfig& cfg, const model::ModelWeights& weights, const eval::ClipPair& pair) {
  ItemResult r;
  Tape tape;
  const model::ModelVars vars = bind(tape, weights);
  Var x = tape.constant(pair.degraded);
  try {
    Var y = model::vistripformer_forward(x, cfg.model, vars);
    const loss::LossTerms terms = loss::total_loss(y, tape.constant(pair.clean), cfg.loss);
    r.loss = terms.report();
    r.finite = std::isfinite(r.loss.total);
    if (!r.finite) return r;
    tape.backward(terms.total);
    r.grads = gradients(vars);
    r.quality = metrics::quality_metrics(y.value(), pair.clean);
  } catch (const NumericError&) {
    // Ops that refuse non-finite input (softmax) report divergence this way.
    r.finite = false;
  }
  return r;
}

bool all_finite(const model::ModelWeights& g) {
  bool ok = true;
  for_each_param(g, "", [&ok](const std::string&, const Tensor& t) { ok = ok && vistrip::all_finite(t); });
  return ok;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  loss.validate();
  const std::size_t s = model.total_stride();
  if (crop == 0 || crop % s != 0)
    throw ConfigError("crop (" + std::to_string(crop) + ") must be a positive multiple of the encoder stride " +
                      std::to_string(s));
  if (source() < crop) throw ConfigError("source (" + std::to_string(source()) + ") is smaller than crop");
  if (batch == 0) throw ConfigError("batch must be >= 1");
  if (steps == 0) throw ConfigError("steps must be >= 1");
  if (!(lr > lr_final && lr_final > 0.0)) throw ConfigError("need lr > lr_final > 0");
  if (!(grad_clip > 0.0)) throw ConfigError("clip must be positive");
  if (val_sequences == 0) throw ConfigError("val_sequences must be >= 1");
}

std::string metrics_csv_header() { return "step,split,psnr_db,ssim,charbonnier,fft,total\n"; }

std::string metrics_csv_row(const StepLog& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.step, row.split.c_str(),
                metrics::psnr_for_csv(row.psnr_db), row.ssim, row.loss.charbonnier, row.loss.fft, row.loss.total);
  return buf;
}

std::vector<eval::ClipPair> validation_set(const TrainConfig& cfg) {
  data::DatasetOptions opts;
  opts.kind = cfg.task;
  opts.sequences = cfg.val_sequences;
  opts.frames = cfg.frames();
  opts.height = cfg.crop;
  opts.width = cfg.crop;
  opts.seed = Rng::mix(cfg.seed, kValStream);
  opts.mixed_orientation = cfg.mixed_orientation;
  std::vector<eval::ClipPair> out;
  auto seqs = data::make_sequences(opts);
  for (std::size_t i = 0; i < seqs.size(); ++i)
    out.push_back({"val_" + std::to_string(i), std::move(seqs[i].clean.frames), std::move(seqs[i].degraded)});
  return out;
}

eval::ClipPair training_pair(const TrainConfig& cfg, std::size_t step, std::size_t item) {
  const std::uint64_t stream = Rng::mix(cfg.seed, kTrainStream);
  const std::uint64_t index = static_cast<std::uint64_t>(step) * 4096 + item;
  const auto spec = synth::task_spec(cfg.task, stream, index, cfg.mixed_orientation);
  const auto pair =
      synth::gen_video_pair(Rng::mix(stream ^ 0x5eed, index), cfg.frames(), cfg.source(), cfg.source(), spec);
  const auto aug = augment::augment_pair({pair.clean.frames, pair.degraded}, cfg.crop, cfg.crop, Rng::mix(stream, ~index));
  return {"train", aug.clean, aug.degraded};
}

TrainResult train(const TrainConfig& cfg, const std::filesystem::path& run_dir, const Progress& progress) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const bool write = !run_dir.empty();
  std::ofstream csv;
  if (write) {
    std::filesystem::create_directories(run_dir);
    std::ofstream(run_dir / "config.txt", std::ios::trunc) << to_text(cfg);
    csv.open(run_dir / "metrics.csv", std::ios::trunc);
    if (!csv) throw Error("cannot write " + (run_dir / "metrics.csv").string());
    csv << metrics_csv_header() << std::flush;
  }

  TrainResult res;
  res.weights = model::init_weights(cfg.model, Rng::mix(cfg.seed, kInitStream));
  auto params = named_tensors(res.weights);
  std::vector<Tensor*> param_ptrs;
  for (auto& [name, t] : params) param_ptrs.push_back(t);

  const auto val = validation_set(cfg);
  const optim::Schedule sched{cfg.lr, cfg.lr_final, cfg.steps};
  optim::OptimizerState opt;
  const std::size_t threads = std::min(cfg.threads ? cfg.threads : thread_budget(), cfg.batch);
  res.best_val_total = std::numeric_limits<double>::infinity();

  auto emit = [&](const StepLog& row) {
    res.log.push_back(row);
    if (write) csv << metrics_csv_row(row) << std::flush;
    if (progress) progress(row);
  };
  auto save = [&](const char* name) {
    if (write) model::save_checkpoint(run_dir / name, cfg.model, res.weights);
  };

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    std::vector<eval::ClipPair> batch(cfg.batch);
    std::vector<ItemResult> items(cfg.batch);
    parallel_for(
        cfg.batch,
        [&](std::size_t i) {
          batch[i] = training_pair(cfg, step, i);
          items[i] = run_item(cfg, res.weights, batch[i]);
        },
        threads);

    StepLog row;
    row.step = step;
    row.split = "train";
    bool finite = true;
    for (const auto& it : items) finite = finite && it.finite;
    model::ModelWeights grad_sum;
    if (finite) {
      grad_sum = std::move(items[0].grads);
      auto acc = named_tensors(grad_sum);
      for (std::size_t i = 1; i < items.size(); ++i) {
        auto g = named_tensors(items[i].grads);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k].second->add_inplace(*g[k].second);
      }
      for (auto& [name, t] : acc) t->scale_inplace(1.0 / static_cast<double>(cfg.batch));
      finite = all_finite(grad_sum);
    }
    if (!finite) {
      res.aborted = true;
      res.abort_reason = "non-finite loss or gradient at step " + std::to_string(step);
      save("last.vsck");
      break;
    }

    const double bn = static_cast<double>(cfg.batch);
    for (const auto& it : items) {
      row.psnr_db += it.quality.psnr_db / bn;
      row.ssim += it.quality.ssim / bn;
      row.loss.charbonnier += it.loss.charbonnier / bn;
      row.loss.fft += it.loss.fft / bn;
    }
    row.loss.total = row.loss.charbonnier + cfg.loss.lambda * row.loss.fft;
    res.train_loss.push_back(row.loss.total);
    emit(row);

    auto grads = named_tensors(grad_sum);
    std::vector<Tensor*> grad_ptrs;
    for (auto& [name, t] : grads) grad_ptrs.push_back(t);
    optim::clip_global_norm(grad_ptrs, cfg.grad_clip);
    std::vector<const Tensor*> grad_cptrs(grad_ptrs.begin(), grad_ptrs.end());
    const model::ModelWeights before = res.weights;
    optim::adam_step(param_ptrs, grad_cptrs, opt, optim::cosine_lr(step - 1, sched));
    for (Tensor* p : param_ptrs) round_to_f32(*p);
    if (!all_finite(res.weights)) {
      // The update overflowed single precision; keep the last finite weights.
      res.weights = before;
      res.aborted = true;
      res.abort_reason = "weights overflowed at step " + std::to_string(step);
      save("last.vsck");
      break;
    }
    res.steps_run = step;

    if ((cfg.val_every && step % cfg.val_every == 0) || step == cfg.steps) {
      eval::EvalReport rep;
      try {
        rep = eval::evaluate_pairs(val, cfg.model, res.weights, cfg.loss);
      } catch (const NumericError& e) {
        res.aborted = true;
        res.abort_reason = "validation diverged at step " + std::to_string(step) + ": " + e.what();
        save("last.vsck");
        break;
      }
      StepLog v;
      v.step = step;
      v.split = "val";
      v.psnr_db = rep.mean_restored.quality.psnr_db;
      v.ssim = rep.mean_restored.quality.ssim;
      v.loss = rep.mean_restored.loss;
      emit(v);
      res.val_baseline = rep.mean_baseline;
      res.val_final = rep.mean_restored;
      save("last.vsck");
      if (rep.mean_restored.loss.total < res.best_val_total) {
        res.best_val_total = rep.mean_restored.loss.total;
        res.best_step = step;
        save("best.vsck");
      }
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace vistrip::train
