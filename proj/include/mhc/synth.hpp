#pragma once

#include <cstdint>
#include <vector>

#include "mhc/raster.hpp"

namespace mhc {

struct SynthFrame {
  Image image;
  LabelMap leaves;
  /// 0 background, k for the k-th object.
  LabelGrid truth;
};

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  Rgb color;
};

struct SynthSpec {
  int width = 128;
  int height = 128;
  int background_cells = 18;
};

/// Background of full-height stripes (widths jittered by 1 px) whose
/// colors differ only inside one histogram bin, with saturated rectangles
/// painted on top. Leaves are the 4-connected pieces of stripes and
/// rectangles. Uses raw mt19937 outputs only, so results are identical
/// across standard libraries.
SynthFrame synth_frame(const SynthSpec& spec, std::uint32_t seed, const std::vector<Rect>& objects);

/// 2 frames with a red and a blue rectangle; frame 2 is shifted by (2, 1)
/// and uses different stripe edges.
std::vector<SynthFrame> two_rectangles(std::uint32_t seed);

/// One rectangle moving `shift` pixels right per frame.
std::vector<SynthFrame> translated_rectangle(std::uint32_t seed, int frames = 6, int shift = 3);

/// Identical frames.
std::vector<SynthFrame> static_sequence(std::uint32_t seed, int frames = 3);

}  // namespace mhc
