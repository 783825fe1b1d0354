#include "vistrip/losses.hpp"

#include "vistrip/ops.hpp"

namespace vistrip::loss {

void LossConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("loss epsilon must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("loss lambda must be non-negative");
}

namespace {

void check_pair(const Shape& a, const Shape& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": restored " + to_string(a) + " vs truth " + to_string(b));
  if (a.size() != 4) throw ShapeError(std::string(what) + ": expected [T,H,W,C], got " + to_string(a));
}

std::vector<double> values_of(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

Var charbonnier_loss(Var restored, Var truth, double eps, CharbonnierMode mode) {
  check_pair(restored.shape(), truth.shape(), "charbonnier_loss");
  if (!(eps > 0.0)) throw ConfigError("charbonnier epsilon must be positive");
  Var d = ops::sub(restored, truth);
  Var sq = ops::mul(d, d);
  if (mode == CharbonnierMode::PerPixel) {
    return ops::mean(ops::sqrt(ops::add_scalar(sq, eps * eps)));
  }
  Var per_frame = ops::sqrt(ops::add_scalar(ops::sum_per_leading(sq), eps * eps));
  return ops::mean(per_frame);
}

Var fft_loss(Var restored, Var truth) {
  check_pair(restored.shape(), truth.shape(), "fft_loss");
  return ops::mean(ops::spectral_l1_per_frame(ops::sub(restored, truth)));
}

LossTerms total_loss(Var restored, Var truth, const LossConfig& cfg) {
  cfg.validate();
  LossTerms t;
  t.charbonnier = charbonnier_loss(restored, truth, cfg.epsilon, cfg.mode);
  t.fft = fft_loss(restored, truth);
  t.total = ops::add(t.charbonnier, ops::scale(t.fft, cfg.lambda));
  return t;
}

LossReport LossTerms::report() const {
  LossReport r;
  r.charbonnier = charbonnier.value().item();
  r.fft = fft.value().item();
  r.total = total.value().item();
  return r;
}

double charbonnier_loss(const Tensor& restored, const Tensor& truth, double eps, CharbonnierMode mode) {
  Tape tape;
  return charbonnier_loss(tape.constant(restored), tape.constant(truth), eps, mode).value().item();
}

double fft_loss(const Tensor& restored, const Tensor& truth) {
  Tape tape;
  return fft_loss(tape.constant(restored), tape.constant(truth)).value().item();
}

LossReport total_loss(const Tensor& restored, const Tensor& truth, const LossConfig& cfg) {
  cfg.validate();
  check_pair(restored.shape(), truth.shape(), "total_loss");
  Tape tape;
  Var r = tape.constant(restored);
  Var g = tape.constant(truth);
  Var d = ops::sub(r, g);
  const double eps2 = cfg.epsilon * cfg.epsilon;

  LossReport rep;
  if (cfg.mode == CharbonnierMode::PerFrame) {
    Var pf = ops::sqrt(ops::add_scalar(ops::sum_per_leading(ops::mul(d, d)), eps2));
    rep.per_frame_charbonnier = values_of(pf.value());
    rep.charbonnier = ops::mean(pf).value().item();
  } else {
    Var px = ops::sqrt(ops::add_scalar(ops::mul(d, d), eps2));
    rep.charbonnier = ops::mean(px).value().item();
    Var pf = ops::sum_per_leading(px);
    const double per = static_cast<double>(px.value().size() / px.value().extent(0));
    for (double v : pf.value().data()) rep.per_frame_charbonnier.push_back(v / per);
  }
  Var spec = ops::spectral_l1_per_frame(d);
  rep.per_frame_fft = values_of(spec.value());
  rep.fft = ops::mean(spec).value().item();
  rep.total = rep.charbonnier + cfg.lambda * rep.fft;
  return rep;
}

}  // namespace vistrip::loss
