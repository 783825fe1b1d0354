#include "vistrip/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vistrip/footprint.hpp"
#include "vistrip/gradcheck.hpp"
#include "vistrip/locality.hpp"
#include "vistrip/losses.hpp"
#include "vistrip/ops.hpp"
#include "vistrip/oracle.hpp"
#include "vistrip/random.hpp"
#include "vistrip/strip_attention.hpp"

namespace vistrip::verify {
namespace {

using attn::Directions;
using attn::Mechanism;

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr Mechanism kMechanisms[] = {Mechanism::Intra, Mechanism::Inter, Mechanism::Joint};

SuiteCheck oracle_check(Mechanism m, bool small) {
  double worst = 0.0;
  std::size_t cases = 0;
  std::uint64_t seed = 100 + static_cast<std::uint64_t>(m);
  const std::vector<std::size_t> frames = small ? std::vector<std::size_t>{1, 3} : std::vector<std::size_t>{1, 2, 4};
  for (std::size_t t : frames)
    for (std::size_t heads : {1u, 2u}) {
      Rng rng(++seed);
      const auto p = attn::init_strip_params(8, heads, rng);
      const Tensor x = random_normal({t, 4, 6, 8}, rng);
      attn::StripTrace trace;
      attn::apply_block(x, p, {m, Directions::Both}, &trace);
      const auto o = oracle_attended_features(x, p, m);
      worst = std::max({worst, max_abs_diff(trace.attended_h, o.attended_h),
                        max_abs_diff(trace.attended_v, o.attended_v)});
      ++cases;
    }
  return {std::string("oracle ") + attn::to_string(m), worst <= 1e-9,
          fmt("%zu cases, max abs diff %.2e (tol 1e-9)", cases, worst)};
}

SuiteCheck wrong_scale_control() {
  Rng rng(7);
  const auto p = attn::init_strip_params(8, 2, rng);
  const Tensor x = random_normal({2, 4, 6, 8}, rng);
  attn::StripTrace trace;
  attn::apply_block(x, p, {Mechanism::Intra, Directions::Both}, &trace);
  const double d =
      max_abs_diff(trace.attended_h, oracle_attended_features(x, p, Mechanism::Intra, ScaleRule::HeadDim).attended_h);
  return {"oracle rejects wrong scale", d > 1e-6, fmt("diff %.2e (must exceed 1e-6)", d)};
}

GradCheckReport block_gradients(Mechanism m, std::size_t samples, double faulty) {
  Rng rng(11);
  const auto p = attn::init_strip_params(8, 2, rng);
  const Tensor x = random_normal({2, 3, 4, 8}, rng);
  const Tensor probe = random_normal({2, 3, 4, 8}, rng);
  return finite_diff_check<attn::StripAttentionParamsT>(
      [&](Tape& tape, const attn::StripAttentionVars& v) {
        Var y = attn::strip_attention_block(tape.constant(x), v, {m, Directions::Both});
        if (faulty != 1.0) y = faulty_identity(y, faulty);
        return ops::sum(ops::mul(y, tape.constant(probe)));
      },
      p, {.samples_per_tensor = samples, .seed = 5});
}

SuiteCheck gradient_check(Mechanism m, bool small) {
  const auto rep = block_gradients(m, small ? 8 : 64, 1.0);
  return {std::string("gradients ") + attn::to_string(m), rep.passed(1e-4),
          fmt("%zu tensors, max rel err %.2e (tol 1e-4)", rep.tensors.size(), rep.max_rel_error)};
}

SuiteCheck faulty_gradient_control() {
  const auto rep = block_gradients(Mechanism::Inter, 4, 1.01);
  return {"gradient check rejects 1% error", !rep.passed(1e-4), fmt("max rel err %.2e", rep.max_rel_error)};
}

SuiteCheck footprint_check(bool small) {
  const std::size_t grids[5][3] = {{1, 4, 4}, {2, 6, 4}, {3, 8, 8}, {4, 8, 6}, {4, 12, 12}};
  const std::size_t n = small ? 3 : 5;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < n; ++i) ok += attn::attention_footprint(grids[i][0], grids[i][1], grids[i][2]).matches();
  return {"footprint counts", ok == n, fmt("%zu/%zu grids match closed forms", ok, n)};
}

SuiteCheck loss_check() {
  Rng rng(3);
  const Tensor a = random_uniform({2, 6, 10, 3}, rng, 0.0, 1.0);
  Tensor b = a;
  for (double& v : b.data()) v += 0.25;
  const auto same = loss::total_loss(a, a, {});
  const double off = loss::fft_loss(b, a);
  // A constant offset puts all spectral mass in the DC bin: 0.25 * H * W per channel, summed over channels.
  const bool pass = std::abs(same.charbonnier - 1e-3) < 1e-15 && same.fft == 0.0 && std::abs(off - 45.0) < 1e-9;
  return {"loss identities", pass,
          fmt("charbonnier(x,x) %.3g, fft(x,x) %.3g, fft(offset) %.6g", same.charbonnier, same.fft, off)};
}

SuiteCheck locality_check(Mechanism m, bool small) {
  Rng rng(8 + static_cast<std::uint64_t>(m));
  const Tensor x = random_normal({3, 5, 6, 8}, rng);
  const auto p = attn::init_strip_params(8, 2, rng);
  const BlockFn fn = [&p, m](const Tensor& v) { return attn::apply_block(v, p, {m, Directions::Both}); };
  const std::size_t sites = small ? 4 : 12;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < sites; ++i) {
    const ProbeSite s{rng.below(3), rng.below(5), rng.below(6), rng.below(8)};
    const auto fp = locality_probe(fn, x, s);
    if (m == Mechanism::Intra ? fp.within_frame(s.frame) : fp.within_cross(s.row, s.col)) ++ok;
  }
  const char* what = m == Mechanism::Intra ? "frame" : "row/column";
  return {std::string("locality ") + attn::to_string(m), ok == sites, fmt("%zu/%zu sites %s-confined", ok, sites, what)};
}

}  // namespace

std::vector<SuiteCheck> run_property_suite(bool small) {
  std::vector<SuiteCheck> out;
  for (Mechanism m : kMechanisms) out.push_back(oracle_check(m, small));
  out.push_back(wrong_scale_control());
  for (Mechanism m : kMechanisms) out.push_back(gradient_check(m, small));
  out.push_back(faulty_gradient_control());
  out.push_back(footprint_check(small));
  out.push_back(loss_check());
  out.push_back(locality_check(Mechanism::Intra, small));
  out.push_back(locality_check(Mechanism::Inter, small));
  return out;
}

std::string format_suite(const std::vector<SuiteCheck>& checks) {
  std::size_t width = 0;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  std::string out;
  for (const auto& c : checks) {
    out += c.passed ? "PASS  " : "FAIL  ";
    out += c.name + std::string(width - c.name.size() + 2, ' ') + c.detail + "\n";
  }
  return out;
}

}  // namespace vistrip::verify
