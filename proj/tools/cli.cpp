#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mhc/bundle.hpp"
#include "mhc/error.hpp"
#include "mhc/metrics.hpp"
#include "mhc/synth.hpp"

namespace mhc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void config_error(const std::string& op, const std::string& cause) {
  throw Error(ErrorKind::config, kModule, op, cause);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) config_error("config", where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) config_error("config", "unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("config", std::string("bad value for '") + key + "'");
  }
}

std::vector<fs::path> read_paths(const json& j, const char* key, const fs::path& base) {
  std::vector<fs::path> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) config_error("config", std::string("'") + key + "' must be a list of paths");
  for (const auto& e : j.at(key)) {
    if (e.is_null()) {
      out.emplace_back();
      continue;
    }
    if (!e.is_string()) config_error("config", std::string("'") + key + "' must be a list of paths");
    const fs::path p = e.get<std::string>();
    out.push_back(p.is_absolute() ? p : base / p);
  }
  return out;
}

std::string frame_name(const char* prefix, std::size_t f, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%03zu%s", prefix, f, ext);
  return name;
}

void write_file(const fs::path& path, const std::string& text, OutputTracker& out) {
  out.file(path);
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorKind::input, kModule, "write", "cannot write " + path.string());
}

std::vector<FrameInput> load_frames(const RunConfig& c) {
  if (c.frames.empty()) throw Error(ErrorKind::input, kModule, "load", "no frames given");
  if (!c.leaves.empty() && c.leaves.size() != c.frames.size())
    throw Error(ErrorKind::input, kModule, "load", "leaves list does not match the frame list");
  if (!c.hierarchies.empty() && c.hierarchies.size() != c.frames.size())
    throw Error(ErrorKind::input, kModule, "load", "hierarchy list does not match the frame list");
  std::vector<FrameInput> frames;
  for (std::size_t f = 0; f < c.frames.size(); ++f) {
    Image image = load_image(c.frames[f]);
    LabelMap leaves = !c.leaves.empty() && !c.leaves[f].empty() ? load_label_map(c.leaves[f])
                                                                 : block_leaves(image.width(), image.height(), c.block);
    std::optional<Hierarchy> h;
    if (!c.hierarchies.empty() && !c.hierarchies[f].empty()) h = load_hierarchy(c.hierarchies[f]);
    frames.push_back({std::move(image), std::move(leaves), std::move(h)});
  }
  return frames;
}

void cmd_hierarchy(const RunConfig& c, OutputTracker& out) {
  const auto frames = load_frames(c);
  out.directory(c.output);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Hierarchy h = frames[f].hierarchy ? *frames[f].hierarchy : build_bpt(frames[f].image, frames[f].leaves);
    if (h.leaf_count() != frames[f].leaves.region_count())
      throw Error(ErrorKind::input, kModule, "hierarchy", "hierarchy does not match its leave partition");
    const fs::path p = c.output / frame_name("hierarchy", f, ".json");
    out.file(p);
    save_hierarchy(h, p);
  }
}

void cmd_cocluster(const RunConfig& c, OutputTracker& out) {
  const auto frames = load_frames(c);
  const Level level = c.level ? *c.level : schedule_of(c).front();
  const LevelSolution sol = cocluster(frames, level, c.pipeline);
  if (!sol.feasible) throw Error(ErrorKind::infeasible, kModule, "cocluster", sol.note);
  write_bundle(make_bundle(std::vector<LevelSolution>{sol}, static_cast<int>(frames.size()), "cocluster"), c.output, out);
}

void cmd_multires(const RunConfig& c, OutputTracker& out) {
  const auto frames = load_frames(c);
  const auto schedule = schedule_of(c);
  const auto sols = multiresolution(frames, schedule, c.pipeline);
  write_bundle(make_bundle(sols, static_cast<int>(frames.size()), "multires"), c.output, out);
}

void cmd_video(const RunConfig& c, OutputTracker& out) {
  const auto frames = load_frames(c);
  const auto schedule = schedule_of(c);
  write_bundle(make_bundle(video_segment(frames, schedule, c.pipeline), "video"), c.output, out);
}

void cmd_eval(const RunConfig& c, OutputTracker& out) {
  if (c.bundle.empty()) config_error("eval", "'bundle' is required");
  const Bundle b = read_bundle(c.bundle);
  if (static_cast<int>(c.ground_truth.size()) != b.frame_count())
    throw Error(ErrorKind::input, kModule, "eval", "ground truth list does not match the bundle frames");
  std::vector<LabelGrid> gt;
  std::vector<Mask> objects;
  for (const auto& p : c.ground_truth) {
    gt.push_back(read_label_grid(p));
    objects.push_back(gt.back().array() != c.gt_background);
  }
  out.directory(c.output);
  std::ostringstream pr, summary;
  pr.precision(17);
  summary.precision(17);
  pr << "level,frame,precision,recall\n";
  summary << "level,t,beta,efficiency,consistency\n";
  for (int r = 0; r < b.level_count(); ++r) {
    const auto& level = b.schedule[static_cast<std::size_t>(r)];
    std::vector<LabelGrid> labels;
    for (int f = 0; f < b.frame_count(); ++f) {
      const LabelGrid& g = b.labels[static_cast<std::size_t>(f)][static_cast<std::size_t>(r)];
      if (g.size() == 0) break;
      labels.push_back(g);
    }
    if (static_cast<int>(labels.size()) != b.frame_count()) {
      summary << r << ',' << level.t << ',' << level.beta << ",,\n";
      continue;
    }
    for (int f = 0; f < b.frame_count(); ++f) {
      const auto fs_ = static_cast<std::size_t>(f);
      const auto curve = consistency_curve(labels[fs_], objects[fs_]);
      char name[64];
      std::snprintf(name, sizeof name, "consistency_level_%02d_frame_%03d.csv", r, f);
      write_file(c.output / name, curve_csv(curve), out);
      const auto score = boundary_pr(boundary_mask(labels[fs_]), boundary_mask(gt[fs_]), c.boundary_tolerance);
      pr << r << ',' << f << ',' << score.precision << ',' << score.recall << '\n';
    }
    const auto curve = sequence_consistency_curve(labels, objects);
    char name[64];
    std::snprintf(name, sizeof name, "consistency_level_%02d.csv", r);
    write_file(c.output / name, curve_csv(curve), out);
    summary << r << ',' << level.t << ',' << level.beta << ',';
    if (curve.empty())
      summary << "0,0\n";
    else
      summary << curve.back().efficiency << ',' << curve.back().consistency << '\n';
  }
  write_file(c.output / "boundary_pr.csv", pr.str(), out);
  write_file(c.output / "summary.csv", summary.str(), out);
}

void cmd_render(const RunConfig& c, OutputTracker& out) {
  if (c.bundle.empty()) config_error("render", "'bundle' is required");
  const Bundle b = read_bundle(c.bundle);
  if (static_cast<int>(c.frames.size()) != b.frame_count())
    throw Error(ErrorKind::input, kModule, "render", "frame list does not match the bundle frames");
  std::vector<Image> images;
  for (const auto& p : c.frames) images.push_back(load_image(p));
  for (int r = 0; r < b.level_count(); ++r) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "level_%02d", r);
    out.directory(c.output / dir);
    for (int f = 0; f < b.frame_count(); ++f) {
      const LabelGrid& g = b.labels[static_cast<std::size_t>(f)][static_cast<std::size_t>(r)];
      if (g.size() == 0) continue;
      const fs::path overlay = c.output / dir / frame_name("frame", static_cast<std::size_t>(f), "_overlay.png");
      const fs::path fill = c.output / dir / frame_name("frame", static_cast<std::size_t>(f), "_fill.png");
      out.file(overlay);
      save_image(render_overlay(images[static_cast<std::size_t>(f)], g), overlay);
      out.file(fill);
      save_image(render_fill(g), fill);
    }
  }
}

void cmd_synth(const RunConfig& c, OutputTracker& out) {
  std::vector<SynthFrame> frames;
  if (c.fixture == "two_rectangles")
    frames = two_rectangles(c.seed);
  else if (c.fixture == "translated_rectangle")
    frames = translated_rectangle(c.seed, c.frame_count);
  else if (c.fixture == "static_sequence")
    frames = static_sequence(c.seed, c.frame_count);
  else
    config_error("synth", "unknown fixture '" + c.fixture + "'");
  out.directory(c.output);
  json run;
  run["frames"] = json::array();
  run["leaves"] = json::array();
  run["ground_truth"] = json::array();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string image = frame_name("frame", f, ".png"), leaves = frame_name("leaves", f, ".csv"),
                      truth = frame_name("truth", f, ".csv");
    out.file(c.output / image);
    save_image(frames[f].image, c.output / image);
    out.file(c.output / leaves);
    save_label_map(frames[f].leaves, c.output / leaves);
    out.file(c.output / truth);
    write_label_grid(frames[f].truth, c.output / truth);
    run["frames"].push_back(image);
    run["leaves"].push_back(leaves);
    run["ground_truth"].push_back(truth);
  }
  run["schedule"] = {{"levels", 10}, {"t_max", 0.4}, {"t_min", 0.1}, {"beta", 0.1}};
  run["descriptors"] = {{"mu", 0.01}};
  run["gt_background"] = 0;
  write_file(c.output / "run.json", run.dump(2) + "\n", out);
}

}  // namespace

LabelMap block_leaves(int width, int height, int block) {
  if (block < 1) config_error("config", "block must be >= 1");
  const int per_row = (width + block - 1) / block;
  LabelGrid raw(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) raw(y, x) = (y / block) * per_row + x / block;
  return LabelMap::from_grid(raw);
}

RunConfig parse_config(const json& j, const fs::path& base) {
  check_keys(j,
             {"frames", "leaves", "hierarchies", "ground_truth", "schedule", "level", "descriptors", "band_weighting",
              "solver", "output", "bundle", "gt_background", "boundary_tolerance", "block", "fixture", "seed",
              "frame_count"},
             "config");
  RunConfig c;
  c.frames = read_paths(j, "frames", base);
  c.leaves = read_paths(j, "leaves", base);
  c.hierarchies = read_paths(j, "hierarchies", base);
  c.ground_truth = read_paths(j, "ground_truth", base);
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    check_keys(s, {"levels", "t_max", "t_min", "beta"}, "schedule");
    read(s, "levels", c.levels);
    read(s, "t_max", c.t_max);
    read(s, "t_min", c.t_min);
    read(s, "beta", c.beta);
  }
  if (j.contains("level")) {
    const auto& l = j.at("level");
    check_keys(l, {"t", "beta"}, "level");
    Level level;
    read(l, "t", level.t);
    read(l, "beta", level.beta);
    c.level = level;
  }
  if (j.contains("descriptors")) {
    const auto& d = j.at("descriptors");
    check_keys(d, {"bins", "cell", "half_disk", "window", "mu", "var_color", "var_shape", "var_position",
                   "smoothing_sigma"},
               "descriptors");
    auto& dc = c.pipeline.descriptors;
    read(d, "bins", dc.bins);
    read(d, "cell", dc.cell);
    read(d, "half_disk", dc.half_disk);
    read(d, "window", dc.window);
    read(d, "mu", dc.mu);
    read(d, "var_color", dc.var_color);
    read(d, "var_shape", dc.var_shape);
    read(d, "var_position", dc.var_position);
    read(d, "smoothing_sigma", dc.smoothing_sigma);
  }
  if (j.contains("band_weighting")) {
    std::string w;
    read(j, "band_weighting", w);
    if (w == "length")
      c.pipeline.weighting = BandWeighting::length;
    else if (w == "count")
      c.pipeline.weighting = BandWeighting::count;
    else
      config_error("config", "band_weighting must be 'length' or 'count'");
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, {"iteration_limit", "node_limit", "exact_limit", "tolerance", "refactor_every", "lazy_triangles"},
               "solver");
    auto& sc = c.pipeline.solver;
    read(s, "iteration_limit", sc.iteration_limit);
    read(s, "node_limit", sc.node_limit);
    read(s, "exact_limit", sc.exact_limit);
    read(s, "tolerance", sc.tolerance);
    read(s, "refactor_every", sc.refactor_every);
    read(s, "lazy_triangles", sc.lazy_triangles);
  }
  auto path_key = [&](const char* key, fs::path& out) {
    std::string s;
    read(j, key, s);
    if (s.empty()) return;
    const fs::path p = s;
    out = p.is_absolute() ? p : base / p;
  };
  path_key("output", c.output);
  path_key("bundle", c.bundle);
  read(j, "gt_background", c.gt_background);
  read(j, "boundary_tolerance", c.boundary_tolerance);
  read(j, "block", c.block);
  read(j, "fixture", c.fixture);
  read(j, "seed", c.seed);
  read(j, "frame_count", c.frame_count);
  return c;
}

void validate(const RunConfig& c) {
  if (c.levels < 1) config_error("validate", "schedule.levels must be >= 1");
  if (!(c.t_max >= c.t_min && c.t_min > 0.0 && c.t_max <= 1.0))
    config_error("validate", "schedule requires 1 >= t_max >= t_min > 0");
  if (!(c.beta >= 0.0 && c.beta <= c.t_max)) config_error("validate", "schedule requires 0 <= beta <= t_max");
  if (c.level && !(c.level->t > 0.0 && c.level->t <= 1.0 && c.level->beta >= 0.0 && c.level->beta <= c.level->t))
    config_error("validate", "level requires 0 < t <= 1 and 0 <= beta <= t");
  const auto& d = c.pipeline.descriptors;
  if (!(d.window > 0.0)) config_error("validate", "window must be > 0");
  if (d.bins < 1 || d.bins > 256 || d.cell < 1 || d.half_disk < 1)
    config_error("validate", "bins, cell and half_disk must be positive (bins <= 256)");
  if (!(d.var_color > 0.0 && d.var_shape > 0.0 && d.var_position > 0.0))
    config_error("validate", "variances must be > 0");
  if (!(d.smoothing_sigma >= 0.0)) config_error("validate", "smoothing_sigma must be >= 0");
  const auto& s = c.pipeline.solver;
  if (s.iteration_limit < 1 || s.node_limit < 1 || s.exact_limit < 0 || s.refactor_every < 1 || !(s.tolerance > 0.0))
    config_error("validate", "solver limits must be positive");
  if (!(c.boundary_tolerance >= 0.0)) config_error("validate", "boundary_tolerance must be >= 0");
  if (c.block < 1) config_error("validate", "block must be >= 1");
  if (c.frame_count < 1) config_error("validate", "frame_count must be >= 1");
}

std::vector<Level> schedule_of(const RunConfig& c) { return linear_schedule(c.levels, c.t_max, c.t_min, c.beta); }

int run(const std::vector<std::string>& args) {
  CLI::App app{"Multiresolution hierarchy co-clustering"};
  app.require_subcommand(1);
  std::string config_path;
  std::string output, bundle;
  std::optional<std::uint32_t> seed;
  std::optional<double> mu;
  std::optional<int> levels, exact_limit;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"hierarchy", "Build or import hierarchies and write them as JSON"},
      {"cocluster", "Co-cluster all frames at one level"},
      {"multires", "Co-cluster all frames at every schedule level"},
      {"video", "Segment frames as a video with forward-only freezing"},
      {"eval", "Consistency and boundary metrics of a bundle against ground truth"},
      {"render", "Overlay and fill PNGs for every frame and level of a bundle"},
      {"synth", "Write a synthetic fixture"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON run configuration");
    sub->add_option("-o,--output", output, "Output directory");
    sub->add_option("--bundle", bundle, "Solution bundle to read (eval, render)");
    sub->add_option("--seed", seed, "Seed for synthetic fixtures");
    sub->add_option("--mu", mu, "Regularization offset per matched element pair");
    sub->add_option("--levels", levels, "Number of schedule levels");
    sub->add_option("--exact-limit", exact_limit, "Largest free-variable count solved with rationals");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::config);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  OutputTracker out;
  try {
    RunConfig c;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw Error(ErrorKind::input, kModule, "config", "cannot open " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        config_error("config", std::string("parse error: ") + e.what());
      }
      c = parse_config(j, fs::path(config_path).parent_path());
    }
    if (!output.empty()) c.output = output;
    if (!bundle.empty()) c.bundle = bundle;
    if (seed) c.seed = *seed;
    if (mu) c.pipeline.descriptors.mu = *mu;
    if (levels) c.levels = *levels;
    if (exact_limit) c.pipeline.solver.exact_limit = *exact_limit;
    validate(c);

    if (command == "hierarchy") cmd_hierarchy(c, out);
    if (command == "cocluster") cmd_cocluster(c, out);
    if (command == "multires") cmd_multires(c, out);
    if (command == "video") cmd_video(c, out);
    if (command == "eval") cmd_eval(c, out);
    if (command == "render") cmd_render(c, out);
    if (command == "synth") cmd_synth(c, out);
    out.commit();
    return 0;
  } catch (const Error& e) {
    out.rollback();
    std::cerr << "error: module=" << e.module() << " operation=" << e.operation() << " cause=" << e.cause() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    out.rollback();
    std::cerr << "error: module=" << kModule << " operation=" << command << " cause=" << e.what() << '\n';
    return exit_code(ErrorKind::internal);
  }
}

}  // namespace mhc::cli
