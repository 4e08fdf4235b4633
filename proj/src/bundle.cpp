#include "mhc/bundle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mhc/error.hpp"
#include "mhc/metrics.hpp"

namespace mhc {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "bundle";

void write_text(const fs::path& path, const std::string& text, OutputTracker& out) {
  out.file(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, kModule, "write_bundle", "cannot open " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::input, kModule, "write_bundle", "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, kModule, "read_bundle", "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Bundle make_bundle(const VideoSolution& video, std::string command) {
  Bundle b;
  b.schedule = video.schedule;
  b.labels = video.labels;
  b.leaf_cluster = video.leaf_cluster;
  b.notes = video.notes;
  b.command = std::move(command);
  for (const auto& frame : b.labels)
    for (const auto& g : frame)
      if (g.size() > 0) {
        b.width = static_cast<int>(g.cols());
        b.height = static_cast<int>(g.rows());
      }
  return b;
}

Bundle make_bundle(const std::vector<LevelSolution>& levels, int frame_count, std::string command) {
  Bundle b;
  b.command = std::move(command);
  const auto n = static_cast<std::size_t>(frame_count);
  b.labels.assign(n, std::vector<LabelGrid>(levels.size()));
  b.leaf_cluster.assign(n, std::vector<std::vector<int>>(levels.size()));
  b.notes.assign(n, std::vector<std::string>(levels.size()));
  for (std::size_t r = 0; r < levels.size(); ++r) {
    const auto& s = levels[r];
    b.schedule.push_back(s.level);
    for (std::size_t f = 0; f < n; ++f) {
      b.notes[f][r] = s.note;
      if (!s.feasible) continue;
      b.labels[f][r] = s.labels[f];
      b.leaf_cluster[f][r] = s.leaf_cluster[f];
      b.width = static_cast<int>(s.labels[f].cols());
      b.height = static_cast<int>(s.labels[f].rows());
    }
  }
  return b;
}

OutputTracker::~OutputTracker() {
  if (!committed_) rollback();
}

void OutputTracker::directory(const fs::path& dir) {
  std::vector<fs::path> fresh;
  for (fs::path p = dir; !p.empty() && !fs::exists(p); p = p.parent_path()) {
    fresh.push_back(p);
    if (p == p.parent_path()) break;
  }
  fs::create_directories(dir);
  dirs_.insert(dirs_.end(), fresh.begin(), fresh.end());
}

void OutputTracker::rollback() noexcept {
  std::error_code ec;
  for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
  std::sort(dirs_.begin(), dirs_.end(), [](const fs::path& a, const fs::path& b) {
    return a.native().size() > b.native().size();
  });
  for (const auto& d : dirs_) fs::remove(d, ec);
  files_.clear();
  dirs_.clear();
}

fs::path level_dir(const fs::path& dir, int level) {
  char name[32];
  std::snprintf(name, sizeof name, "level_%02d", level);
  return dir / "clusters" / name;
}

fs::path frame_stem(const fs::path& dir, int level, int frame) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%03d", frame);
  return level_dir(dir, level) / name;
}

void write_bundle(const Bundle& bundle, const fs::path& dir, OutputTracker& out) {
  out.directory(dir);
  nlohmann::json manifest;
  manifest["command"] = bundle.command;
  manifest["width"] = bundle.width;
  manifest["height"] = bundle.height;
  manifest["frames"] = bundle.frame_count();
  manifest["levels"] = nlohmann::json::array();
  for (int r = 0; r < bundle.level_count(); ++r)
    manifest["levels"].push_back({{"index", r}, {"t", bundle.schedule[static_cast<std::size_t>(r)].t},
                                  {"beta", bundle.schedule[static_cast<std::size_t>(r)].beta}});
  manifest["missing"] = nlohmann::json::array();

  std::ostringstream corr;
  corr << "frame,leaf,cluster,level\n";
  for (int r = 0; r < bundle.level_count(); ++r) {
    out.directory(level_dir(dir, r));
    for (int f = 0; f < bundle.frame_count(); ++f) {
      const auto& g = bundle.labels[static_cast<std::size_t>(f)][static_cast<std::size_t>(r)];
      if (g.size() == 0) {
        manifest["missing"].push_back(
            {{"frame", f}, {"level", r}, {"note", bundle.notes[static_cast<std::size_t>(f)][static_cast<std::size_t>(r)]}});
        continue;
      }
      const fs::path stem = frame_stem(dir, r, f);
      for (const char* ext : {".csv", ".png"}) {
        fs::path p = stem;
        p += ext;
        out.file(p);
        write_label_grid(g, p);
      }
      const auto& lc = bundle.leaf_cluster[static_cast<std::size_t>(f)][static_cast<std::size_t>(r)];
      for (std::size_t leaf = 0; leaf < lc.size(); ++leaf) corr << f << ',' << leaf << ',' << lc[leaf] << ',' << r << '\n';
    }
  }
  write_text(dir / "correspondence.csv", corr.str(), out);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n", out);
}

Bundle read_bundle(const fs::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(kModule, "read_bundle", std::string("manifest: ") + e.what());
  }
  Bundle b;
  try {
    b.command = manifest.at("command").get<std::string>();
    b.width = manifest.at("width").get<int>();
    b.height = manifest.at("height").get<int>();
    const int frames = manifest.at("frames").get<int>();
    for (const auto& l : manifest.at("levels")) b.schedule.push_back({l.at("t").get<double>(), l.at("beta").get<double>()});
    const auto levels = b.schedule.size();
    b.labels.assign(static_cast<std::size_t>(frames), std::vector<LabelGrid>(levels));
    b.leaf_cluster.assign(static_cast<std::size_t>(frames), std::vector<std::vector<int>>(levels));
    b.notes.assign(static_cast<std::size_t>(frames), std::vector<std::string>(levels));
    std::vector<std::vector<bool>> missing(static_cast<std::size_t>(frames), std::vector<bool>(levels, false));
    for (const auto& m : manifest.at("missing")) {
      const auto f = m.at("frame").get<std::size_t>(), r = m.at("level").get<std::size_t>();
      if (f >= missing.size() || r >= levels) throw FormatError(kModule, "read_bundle", "missing entry out of range");
      missing[f][r] = true;
      b.notes[f][r] = m.at("note").get<std::string>();
    }
    for (std::size_t r = 0; r < levels; ++r)
      for (std::size_t f = 0; f < static_cast<std::size_t>(frames); ++f) {
        if (missing[f][r]) continue;
        fs::path p = frame_stem(dir, static_cast<int>(r), static_cast<int>(f));
        p += ".csv";
        b.labels[f][r] = read_label_grid(p);
      }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(kModule, "read_bundle", std::string("manifest: ") + e.what());
  }

  std::istringstream corr(read_text(dir / "correspondence.csv"));
  std::string line;
  std::getline(corr, line);
  while (std::getline(corr, line)) {
    if (line.empty()) continue;
    int f = 0, leaf = 0, cluster = 0, r = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d", &f, &leaf, &cluster, &r) != 4 || f < 0 || r < 0 ||
        f >= b.frame_count() || r >= b.level_count() || leaf < 0)
      throw FormatError(kModule, "read_bundle", "bad correspondence row: " + line);
    auto& lc = b.leaf_cluster[static_cast<std::size_t>(f)][static_cast<std::size_t>(r)];
    if (static_cast<int>(lc.size()) <= leaf) lc.resize(static_cast<std::size_t>(leaf) + 1, -1);
    lc[static_cast<std::size_t>(leaf)] = cluster;
  }
  return b;
}

Rgb palette(int cluster) {
  // splitmix64 finalizer
  std::uint64_t z = static_cast<std::uint64_t>(cluster) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return {static_cast<std::uint8_t>(64 + (z & 0xbf)), static_cast<std::uint8_t>(64 + ((z >> 8) & 0xbf)),
          static_cast<std::uint8_t>(64 + ((z >> 16) & 0xbf))};
}

Image render_fill(const LabelGrid& labels) {
  Image out(static_cast<int>(labels.cols()), static_cast<int>(labels.rows()));
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.set(x, y, palette(labels(y, x)));
  return out;
}

Image render_overlay(const Image& image, const LabelGrid& labels) {
  if (image.width() != labels.cols() || image.height() != labels.rows())
    throw Error(ErrorKind::input, kModule, "render_overlay", "image and labels differ in size");
  Image out = image;
  const Mask edges = boundary_mask(labels);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (edges(y, x)) out.set(x, y, {255, 255, 255});
  return out;
}

}  // namespace mhc
