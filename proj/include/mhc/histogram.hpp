#pragma once

#include <vector>

#include <Eigen/Core>

#include "mhc/raster.hpp"

namespace mhc {

/// Concatenated per-channel color histogram (R bins, G bins, B bins).
using Histogram = Eigen::VectorXd;

inline int color_bin(std::uint8_t sample, int bins) { return sample * bins / 256; }

/// Adds one pixel to per-channel counts laid out as [R | G | B].
inline void accumulate(Histogram& counts, Rgb c, int bins) {
  counts[color_bin(c.r, bins)] += 1.0;
  counts[bins + color_bin(c.g, bins)] += 1.0;
  counts[2 * bins + color_bin(c.b, bins)] += 1.0;
}

/// Region color histograms over a leave partition, each normalized to
/// sum 1 over all 3*bins entries.
std::vector<Histogram> region_histograms(const Image& image, const LabelMap& regions, int bins = 8);

/// BC = sum_k sqrt(h1_k h2_k). Both inputs must be non-negative and sum to
/// 1 within 1e-9.
double bhattacharyya_coefficient(const Histogram& h1, const Histogram& h2);

}  // namespace mhc
