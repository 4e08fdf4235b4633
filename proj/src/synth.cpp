#include "mhc/synth.hpp"

#include <random>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr Rgb kRed{224, 32, 32};
constexpr Rgb kBlue{32, 32, 224};

// Background base color, each channel at the center of an 8-bin bucket.
constexpr int kBase[3] = {80, 144, 80};

int jitter(std::mt19937& rng, int amplitude) {
  return static_cast<int>(rng() % static_cast<std::uint32_t>(2 * amplitude + 1)) - amplitude;
}

}  // namespace

SynthFrame synth_frame(const SynthSpec& spec, std::uint32_t seed, const std::vector<Rect>& objects) {
  if (spec.width < 8 || spec.height < 8 || spec.background_cells < 1)
    throw Error(ErrorKind::config, "synth", "synth_frame", "frame too small or no background cells");
  std::mt19937 rng(seed);
  const int cells = spec.background_cells;
  if (spec.width < 4 * cells) throw Error(ErrorKind::config, "synth", "synth_frame", "stripes narrower than 4 px");
  std::vector<int> edge(static_cast<std::size_t>(cells) + 1);
  edge.front() = 0;
  edge.back() = spec.width;
  for (int c = 1; c < cells; ++c) edge[static_cast<std::size_t>(c)] = c * spec.width / cells + jitter(rng, 1);
  std::vector<Rgb> color(static_cast<std::size_t>(cells));
  for (auto& c : color)
    c = {static_cast<std::uint8_t>(kBase[0] + jitter(rng, 6)), static_cast<std::uint8_t>(kBase[1] + jitter(rng, 6)),
         static_cast<std::uint8_t>(kBase[2] + jitter(rng, 6))};

  Image image(spec.width, spec.height);
  LabelGrid raw(spec.height, spec.width);
  LabelGrid truth = LabelGrid::Zero(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    int stripe = 0;
    for (int x = 0; x < spec.width; ++x) {
      while (x >= edge[static_cast<std::size_t>(stripe) + 1]) ++stripe;
      raw(y, x) = stripe;
      const Rgb base = color[static_cast<std::size_t>(stripe)];
      image.set(x, y, {static_cast<std::uint8_t>(base.r + jitter(rng, 3)), static_cast<std::uint8_t>(base.g + jitter(rng, 3)),
                       static_cast<std::uint8_t>(base.b + jitter(rng, 3))});
    }
  }
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const Rect& r = objects[k];
    for (int y = std::max(0, r.y); y < std::min(spec.height, r.y + r.h); ++y)
      for (int x = std::max(0, r.x); x < std::min(spec.width, r.x + r.w); ++x) {
        raw(y, x) = cells + static_cast<int>(k);
        truth(y, x) = static_cast<int>(k) + 1;
        image.set(x, y, r.color);
      }
  }
  return {std::move(image), LabelMap::from_grid(raw), std::move(truth)};
}

std::vector<SynthFrame> two_rectangles(std::uint32_t seed) {
  const SynthSpec spec;
  std::vector<SynthFrame> out;
  for (int f = 0; f < 2; ++f) {
    const int dx = 2 * f, dy = f;
    out.push_back(synth_frame(spec, seed + static_cast<std::uint32_t>(f) * 7919U,
                              {Rect{30 + dx, 34 + dy, 10, 12, kRed}, Rect{80 + dx, 76 + dy, 12, 10, kBlue}}));
  }
  return out;
}

std::vector<SynthFrame> translated_rectangle(std::uint32_t seed, int frames, int shift) {
  if (frames < 1) throw Error(ErrorKind::config, "synth", "translated_rectangle", "frames must be >= 1");
  const SynthSpec spec;
  std::vector<SynthFrame> out;
  for (int f = 0; f < frames; ++f)
    out.push_back(synth_frame(spec, seed + static_cast<std::uint32_t>(f) * 7919U,
                              {Rect{36 + shift * f, 56, 12, 12, kRed}}));
  return out;
}

std::vector<SynthFrame> static_sequence(std::uint32_t seed, int frames) {
  if (frames < 1) throw Error(ErrorKind::config, "synth", "static_sequence", "frames must be >= 1");
  const SynthSpec spec;
  const SynthFrame frame = synth_frame(spec, seed, {Rect{56, 56, 12, 12, kRed}});
  return std::vector<SynthFrame>(static_cast<std::size_t>(frames), frame);
}

}  // namespace mhc
