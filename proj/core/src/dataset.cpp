#include "vistrip/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vistrip/image_io.hpp"
#include "vistrip/random.hpp"

namespace vistrip::data {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  for (std::size_t n = 1; std::getline(is, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || (ls >> extra))
      throw FormatError(path.string() + ":" + std::to_string(n) + ": expected 'clean_path degraded_path'");
    ManifestEntry e;
    e.clean = std::filesystem::path(a).is_absolute() ? std::filesystem::path(a) : base / a;
    e.degraded = std::filesystem::path(b).is_absolute() ? std::filesystem::path(b) : base / b;
    e.line = n;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<synth::VideoPair> make_sequences(const DatasetOptions& opts) {
  std::vector<synth::VideoPair> out;
  for (std::size_t i = 0; i < opts.sequences; ++i) {
    const auto spec = synth::task_spec(opts.kind, opts.seed, i, opts.mixed_orientation);
    out.push_back(synth::gen_video_pair(Rng::mix(opts.seed, 1000 + i), opts.frames, opts.height, opts.width, spec));
  }
  return out;
}

std::filesystem::path write_dataset(const std::filesystem::path& dir, const DatasetOptions& opts) {
  std::filesystem::create_directories(dir);
  const auto manifest = dir / "manifest.txt";
  std::ofstream os(manifest, std::ios::trunc);
  if (!os) throw Error("cannot write " + manifest.string());
  const auto seqs = make_sequences(opts);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%03zu", i);
    io::write_sequence(dir / name / "clean", seqs[i].clean.frames);
    io::write_sequence(dir / name / "degraded", seqs[i].degraded);
    os << name << "/clean " << name << "/degraded\n";
  }
  if (!os) throw Error("cannot write " + manifest.string());
  return manifest;
}

}  // namespace vistrip::data
