// vistrip: data generation, training, restoration, verification and footprint benchmarks.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vistrip/checkpoint.hpp"
#include "vistrip/dataset.hpp"
#include "vistrip/evaluate.hpp"
#include "vistrip/footprint.hpp"
#include "vistrip/image_io.hpp"
#include "vistrip/parallel.hpp"
#include "vistrip/run_config.hpp"
#include "vistrip/strip_attention.hpp"
#include "vistrip/suite.hpp"
#include "vistrip/trainer.hpp"

using namespace vistrip;
namespace fs = std::filesystem;

namespace {

// Flags shared by several subcommands. Each maps onto a config key of the same
// meaning, so a flag and a config-file line are interchangeable.
struct SharedFlags {
  std::string config;
  std::optional<std::string> seed, stack, frames, task, lambda, direction, variant, steps;
  std::string out;

  void add_config(CLI::App* app) { app->add_option("--config", config, "key = value file; flags override it")->type_name("PATH")->check(CLI::ExistingFile); }
  void add_out(CLI::App* app, const std::string& fallback) {
    out = fallback;
    app->add_option("--out", out, "Output directory")->type_name("DIR")->capture_default_str();
  }
  void add(CLI::App* app, const char* flag, std::optional<std::string>& slot, const char* type, const char* help) {
    app->add_option(flag, slot, help)->type_name(type);
  }

  train::TrainConfig resolve() const {
    train::TrainConfig base = config.empty() ? train::TrainConfig{} : train::parse_config(config);
    train::KeyValues kv;
    const std::pair<const char*, const std::optional<std::string>*> keys[] = {
        {"seed", &seed},     {"stack", &stack},         {"frames", &frames},   {"task", &task},
        {"lambda", &lambda}, {"direction", &direction}, {"variant", &variant}, {"steps", &steps}};
    for (const auto& [key, value] : keys)
      if (*value) kv[key] = **value;
    return train::apply_key_values(base, kv);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os || !(os << text)) throw Error("cannot write " + path.string());
}

// Every run records its fully resolved inputs next to its outputs.
void write_manifest(const fs::path& dir, const std::string& command, const std::string& body) {
  fs::create_directories(dir);
  write_text(dir / "resolved.cfg", "# vistrip " + command + "\n" + body);
}

std::vector<std::size_t> parse_grid(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty() || v == 0) throw ConfigError("--grid: bad size '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--grid: no sizes given");
  return out;
}

int gen_data(const SharedFlags& f, std::size_t sequences, std::size_t size) {
  const auto cfg = f.resolve();
  data::DatasetOptions o;
  o.kind = cfg.task;
  o.mixed_orientation = cfg.mixed_orientation;
  o.frames = cfg.frames();
  o.seed = cfg.seed;
  o.sequences = sequences;
  o.height = o.width = size;
  const fs::path dir(f.out);
  const fs::path manifest = data::write_dataset(dir, o);
  std::ostringstream m;
  m << "task = " << synth::to_string(o.kind) << "\nmixed = " << (o.mixed_orientation ? "true" : "false")
    << "\nframes = " << o.frames << "\nseed = " << o.seed << "\nsequences = " << o.sequences
    << "\nsize = " << size << "\n";
  write_manifest(dir, "gen-data", m.str());
  std::printf("wrote %zu sequences of %zu frames (%zux%zu, %s) to %s\n", o.sequences, o.frames, size, size,
              synth::to_string(o.kind), manifest.string().c_str());
  return 0;
}

int train_cmd(const SharedFlags& f) {
  const auto cfg = f.resolve();
  const fs::path dir(f.out);
  write_manifest(dir, "train", train::to_text(cfg));
  const auto res = train::train(cfg, dir, [](const train::StepLog& s) {
    if (s.split == "val" || s.step % 10 == 0)
      std::printf("step %5zu %-5s total %.4f charbonnier %.5f psnr %.3f dB\n", s.step, s.split.c_str(),
                  s.loss.total, s.loss.charbonnier, s.psnr_db);
    std::fflush(stdout);
  });
  std::printf("%zu steps in %.1f s; validation psnr %.3f -> %.3f dB (input %.3f dB)\n", res.steps_run, res.seconds,
              res.log.empty() ? 0.0 : res.val_baseline.quality.psnr_db, res.val_final.quality.psnr_db,
              res.val_baseline.quality.psnr_db);
  if (res.aborted) {
    std::fprintf(stderr, "training stopped: %s\n", res.abort_reason.c_str());
    return 1;
  }
  return 0;
}

int restore_cmd(const SharedFlags& f, const std::string& checkpoint, const std::string& input,
                const std::string& manifest, bool png) {
  const fs::path dir(f.out);
  const auto ck = model::load_checkpoint(checkpoint);
  std::ostringstream m;
  m << "checkpoint = " << fs::absolute(checkpoint).string() << "\ninput = " << (input.empty() ? "" : fs::absolute(input).string())
    << "\nmanifest = " << (manifest.empty() ? "" : fs::absolute(manifest).string()) << "\npng = " << (png ? "true" : "false")
    << "\n# model\n" << model::serialize_model_config(ck.config);
  write_manifest(dir, "restore", m.str());
  if (!input.empty()) {
    const Tensor clip = io::read_sequence(input);
    const Tensor out = eval::restore_clip(clip, ck.config, ck.weights);
    io::write_sequence(dir, out, png);
    std::printf("restored %zu frames to %s\n", out.extent(0), dir.string().c_str());
  }
  if (!manifest.empty()) {
    const auto report = eval::evaluate(checkpoint, manifest);
    write_text(dir / "report.csv", eval::report_csv(report));
    std::printf("%zu sequences: psnr %.3f dB (input %.3f dB), ssim %.4f\n", report.sequences.size(),
                report.mean_restored.quality.psnr_db, report.mean_baseline.quality.psnr_db,
                report.mean_restored.quality.ssim);
    for (const auto& miss : report.missing) std::fprintf(stderr, "skipped %s\n", miss.c_str());
  }
  return 0;
}

int verify_cmd(const SharedFlags& f, bool small) {
  const fs::path dir(f.out);
  write_manifest(dir, "verify", std::string("small = ") + (small ? "true" : "false") + "\n");
  const auto checks = verify::run_property_suite(small);
  const std::string table = verify::format_suite(checks);
  write_text(dir / "report.txt", table);
  std::fputs(table.c_str(), stdout);
  std::size_t failed = 0;
  for (const auto& c : checks) failed += !c.passed;
  std::printf("%zu/%zu checks passed\n", checks.size() - failed, checks.size());
  return failed ? 1 : 0;
}

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int bench_cmd(const SharedFlags& f, const std::string& grid_text, std::size_t channels, std::size_t heads) {
  const auto grid = parse_grid(grid_text);
  const std::size_t frames = f.frames ? train::apply_key_values({}, {{"frames", *f.frames}}).frames() : 4;
  const std::uint64_t seed = f.seed ? train::apply_key_values({}, {{"seed", *f.seed}}).seed : 0;
  const fs::path dir(f.out);
  std::ostringstream m;
  m << "grid = " << grid_text << "\nframes = " << frames << "\nchannels = " << channels << "\nheads = " << heads
    << "\nseed = " << seed << "\n";
  write_manifest(dir, "bench", m.str());

  std::ostringstream csv;
  csv << "frames,height,width,intra_closed,intra_measured,inter_closed,inter_measured,joint_closed,joint_measured,"
         "full_closed,full_measured,equal,intra_ms,inter_ms,joint_ms,full_ms\n";
  bool all_equal = true;
  Rng rng(seed);
  const auto p = attn::init_strip_params(channels, heads, rng);
  for (std::size_t s : grid) {
    const auto r = attn::attention_footprint(frames, s, s);
    all_equal = all_equal && r.matches();
    const Tensor x = random_normal({frames, s, s, channels}, rng);
    double ms[3];
    int i = 0;
    for (auto mech : {attn::Mechanism::Intra, attn::Mechanism::Inter, attn::Mechanism::Joint})
      ms[i++] = time_ms([&] { attn::apply_block(x, p, {mech, attn::Directions::Both}); });
    const double full = time_ms([&] { attn::full_attention_forward(x, heads, nullptr); });
    csv << frames << ',' << s << ',' << s << ',' << r.intra_closed << ',' << r.intra_entries << ','
        << r.inter_closed << ',' << r.inter_entries << ',' << r.joint_closed << ',' << r.joint_entries << ','
        << r.full_closed << ',' << r.full_entries << ',' << (r.matches() ? "true" : "false") << ',' << ms[0] << ','
        << ms[1] << ',' << ms[2] << ',' << full << '\n';
  }
  write_text(dir / "bench.csv", csv.str());
  std::fputs(csv.str().c_str(), stdout);
  return all_equal ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strip-attention video restoration"};
  app.require_subcommand(1);
  SharedFlags f;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic degraded/clean dataset with a manifest");
  std::size_t sequences = 4, size = 48;
  f.add_config(gen);
  f.add_out(gen, "data");
  f.add(gen, "--seed", f.seed, "N", "Random seed");
  f.add(gen, "--frames", f.frames, "T", "Frames per sequence");
  f.add(gen, "--task", f.task, "KIND", "blur, rain or moire");
  gen->add_option("--sequences", sequences, "Number of sequences")->check(CLI::Range(1, 10000));
  gen->add_option("--size", size, "Frame height and width")->check(CLI::Range(8, 4096));

  auto* tr = app.add_subcommand("train", "Train a model; writes checkpoints and metrics.csv");
  f.add_config(tr);
  f.add_out(tr, "run");
  f.add(tr, "--seed", f.seed, "N", "Random seed");
  f.add(tr, "--stack", f.stack, "N", "Strip-attention blocks");
  f.add(tr, "--frames", f.frames, "T", "Frames per window");
  f.add(tr, "--task", f.task, "KIND", "blur, rain or moire");
  f.add(tr, "--lambda", f.lambda, "F", "Weight of the frequency loss");
  f.add(tr, "--direction", f.direction, "DIR", "h, v or both");
  f.add(tr, "--variant", f.variant, "NAME", "stsa or joint");
  f.add(tr, "--steps", f.steps, "N", "Optimizer steps");

  auto* rs = app.add_subcommand("restore", "Restore a frame sequence or score a dataset manifest");
  std::string checkpoint, input, manifest;
  bool png = false;
  f.add_out(rs, "restored");
  rs->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  auto* in_opt = rs->add_option("--input", input, "Directory of frame_*.ppm")->check(CLI::ExistingDirectory);
  auto* man_opt = rs->add_option("--manifest", manifest, "Dataset manifest to score")->check(CLI::ExistingFile);
  rs->add_flag("--png", png, "Write PNG instead of PPM");

  auto* ver = app.add_subcommand("verify", "Run the property suite; exit 1 on any failure");
  bool small = false;
  f.add_out(ver, "verify");
  ver->add_flag("--small", small, "Fewer and smaller cases");

  auto* be = app.add_subcommand("bench", "Attention footprint and runtime over a grid of frame sizes");
  std::string grid = "8,16,32";
  std::size_t channels = 16, heads = 8;
  f.add_out(be, "bench");
  f.add(be, "--frames", f.frames, "T", "Frames");
  f.add(be, "--seed", f.seed, "N", "Random seed");
  be->add_option("--grid", grid, "Comma-separated frame sizes (H = W)")->capture_default_str();
  be->add_option("--channels", channels, "Block channels")->capture_default_str();
  be->add_option("--heads", heads, "Attention heads")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (rs->parsed() && in_opt->count() == 0 && man_opt->count() == 0)
      throw CLI::RequiredError("restore needs --input or --manifest");
  } catch (const CLI::CallForHelp&) {
    std::cout << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) return gen_data(f, sequences, size);
    if (tr->parsed()) return train_cmd(f);
    if (rs->parsed()) return restore_cmd(f, checkpoint, input, manifest, png);
    if (ver->parsed()) return verify_cmd(f, small);
    if (be->parsed()) return bench_cmd(f, grid, channels, heads);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
