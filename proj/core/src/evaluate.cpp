#include "vistrip/evaluate.hpp"

#include <cstdio>
#include <sstream>

#include "vistrip/dataset.hpp"
#include "vistrip/image_io.hpp"

namespace vistrip::eval {

namespace {

void accumulate(ClipScore& acc, const ClipScore& s) {
  acc.quality.psnr_db += s.quality.psnr_db;
  acc.quality.ssim += s.quality.ssim;
  acc.loss.charbonnier += s.loss.charbonnier;
  acc.loss.fft += s.loss.fft;
  acc.loss.total += s.loss.total;
}

void divide(ClipScore& acc, double n) {
  acc.quality.psnr_db /= n;
  acc.quality.ssim /= n;
  acc.loss.charbonnier /= n;
  acc.loss.fft /= n;
  acc.loss.total /= n;
}

Tensor frames_range(const Tensor& video, std::size_t begin, std::size_t end) {
  std::vector<Tensor> f;
  for (std::size_t t = begin; t < end; ++t) f.push_back(frame(video, t));
  return stack_frames(f);
}

}  // namespace

ClipScore score_clip(const Tensor& restored, const Tensor& clean, const loss::LossConfig& cfg) {
  ClipScore s;
  s.quality = metrics::quality_metrics(restored, clean);
  s.loss = loss::total_loss(restored, clean, cfg);
  return s;
}

Tensor restore_clip(const Tensor& degraded, const model::ModelConfig& config, const model::ModelWeights& w) {
  if (degraded.rank() != 4) throw ShapeError("restore_clip: expected [T,H,W,3], got " + vistrip::to_string(degraded.shape()));
  const std::size_t T = degraded.extent(0);
  const std::size_t win = std::max<std::size_t>(1, config.frame_window);
  if (T <= win) return model::restore(degraded, config, w);
  std::vector<Tensor> out;
  for (std::size_t b = 0; b < T; b += win) {
    const Tensor r = model::restore(frames_range(degraded, b, std::min(T, b + win)), config, w);
    for (std::size_t t = 0; t < r.extent(0); ++t) out.push_back(frame(r, t));
  }
  return stack_frames(out);
}

EvalReport evaluate_pairs(const std::vector<ClipPair>& pairs, const model::ModelConfig& config,
                          const model::ModelWeights& w, const loss::LossConfig& cfg) {
  EvalReport rep;
  for (const auto& p : pairs) {
    SequenceResult r;
    r.name = p.name;
    r.frames = p.clean.extent(0);
    r.restored = score_clip(restore_clip(p.degraded, config, w), p.clean, cfg);
    r.baseline = score_clip(p.degraded, p.clean, cfg);
    accumulate(rep.mean_restored, r.restored);
    accumulate(rep.mean_baseline, r.baseline);
    rep.sequences.push_back(std::move(r));
  }
  if (!rep.sequences.empty()) {
    divide(rep.mean_restored, static_cast<double>(rep.sequences.size()));
    divide(rep.mean_baseline, static_cast<double>(rep.sequences.size()));
  }
  return rep;
}

EvalReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                    const loss::LossConfig& cfg) {
  const auto ck = model::load_checkpoint(checkpoint);
  std::vector<ClipPair> pairs;
  std::vector<std::string> missing;
  for (const auto& e : data::read_manifest(manifest)) {
    const std::string label = e.clean.string() + " " + e.degraded.string();
    std::string reason;
    if (!std::filesystem::exists(e.clean))
      reason = "missing " + e.clean.string();
    else if (!std::filesystem::exists(e.degraded))
      reason = "missing " + e.degraded.string();
    if (reason.empty()) {
      try {
        ClipPair p{e.degraded.parent_path().filename().string(), io::read_sequence(e.clean),
                   io::read_sequence(e.degraded)};
        if (p.name.empty() || p.name == "degraded") p.name = e.degraded.parent_path().string();
        if (p.clean.shape() != p.degraded.shape()) {
          reason = "clean and degraded shapes differ";
        } else {
          const std::size_t s = ck.config.total_stride();
          if (p.clean.extent(1) % s != 0 || p.clean.extent(2) % s != 0)
            reason = "frame extents not divisible by " + std::to_string(s);
          else
            pairs.push_back(std::move(p));
        }
      } catch (const Error& ex) {
        reason = ex.what();
      }
    }
    if (!reason.empty()) missing.push_back("line " + std::to_string(e.line) + ": " + label + " (" + reason + ")");
  }
  EvalReport rep = evaluate_pairs(pairs, ck.config, ck.weights, cfg);
  rep.missing = std::move(missing);
  return rep;
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "sequence,frames,psnr_db,ssim,baseline_psnr_db,baseline_ssim,charbonnier,fft,total\n";
  char buf[512];
  auto row = [&](const std::string& name, std::size_t frames, const ClipScore& a, const ClipScore& b) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.9g,%.9g,%.9g\n", name.c_str(), frames,
                  metrics::psnr_for_csv(a.quality.psnr_db), a.quality.ssim, metrics::psnr_for_csv(b.quality.psnr_db),
                  b.quality.ssim, a.loss.charbonnier, a.loss.fft, a.loss.total);
    os << buf;
  };
  std::size_t frames = 0;
  for (const auto& s : r.sequences) {
    row(s.name, s.frames, s.restored, s.baseline);
    frames += s.frames;
  }
  row("mean", frames, r.mean_restored, r.mean_baseline);
  return os.str();
}

}  // namespace vistrip::eval
