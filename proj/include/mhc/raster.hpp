#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace mhc {

/// Integer grid indexed (row = y, col = x).
using LabelGrid = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Real-valued pixel plane indexed (row = y, col = x).
using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Pixel set over a grid.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, samples interleaved and row-major.
class Image {
 public:
  Image(int width, int height);
  Image(int width, int height, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const std::uint8_t> samples() const noexcept { return samples_; }

  Rgb at(int x, int y) const noexcept {
    const auto* p = &samples_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    auto* p = &samples_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  /// Luma 0.299R + 0.587G + 0.114B.
  Plane gray() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> samples_;
};

/// Leave partition: dense labels 0..N-1, each label one 4-connected region,
/// numbered in order of first occurrence in a row-major scan.
class LabelMap {
 public:
  /// Splits every label into its 4-connected components and relabels densely.
  static LabelMap from_grid(const LabelGrid& raw);

  int width() const noexcept { return static_cast<int>(labels_.cols()); }
  int height() const noexcept { return static_cast<int>(labels_.rows()); }
  int region_count() const noexcept { return region_count_; }
  int operator()(int x, int y) const noexcept { return labels_(y, x); }
  const LabelGrid& grid() const noexcept { return labels_; }
  std::vector<int> region_sizes() const;

  friend bool operator==(const LabelMap& a, const LabelMap& b) {
    return a.region_count_ == b.region_count_ && a.labels_.rows() == b.labels_.rows() &&
           a.labels_.cols() == b.labels_.cols() && (a.labels_ == b.labels_).all();
  }

 private:
  LabelMap(LabelGrid labels, int count) : labels_(std::move(labels)), region_count_(count) {}
  LabelGrid labels_;
  int region_count_ = 0;
};

/// 4-connected components of equal labels, numbered in scan order.
/// Returns the component count.
int connected_components(const LabelGrid& raw, LabelGrid& out);

// PNG (8-bit RGB) or binary PPM (P6), chosen by extension on save and by
// signature on load.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

// CSV (one row per pixel row) or 16-bit grayscale PNG.
LabelMap load_label_map(const std::filesystem::path& path);
void save_label_map(const LabelMap& map, const std::filesystem::path& path);

/// Raw grid I/O without relabeling, used for cluster maps whose ids are
/// global and may be disconnected within one image.
LabelGrid read_label_grid(const std::filesystem::path& path);
void write_label_grid(const LabelGrid& grid, const std::filesystem::path& path);

}  // namespace mhc
