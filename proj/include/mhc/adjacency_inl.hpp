#pragma once

#include <algorithm>
#include <cmath>

namespace mhc {

namespace detail {

// Uniform bucket grid over element midpoints, cell side = window.
class ElementBuckets {
 public:
  ElementBuckets(std::span<const ContourElement> elements, double cell) : cell_(cell) {
    if (elements.empty()) return;
    min_x_ = max_x_ = elements.front().x;
    min_y_ = max_y_ = elements.front().y;
    for (const auto& e : elements) {
      min_x_ = std::min(min_x_, e.x);
      max_x_ = std::max(max_x_, e.x);
      min_y_ = std::min(min_y_, e.y);
      max_y_ = std::max(max_y_, e.y);
    }
    cols_ = static_cast<int>(std::floor((max_x_ - min_x_) / cell_)) + 1;
    rows_ = static_cast<int>(std::floor((max_y_ - min_y_) / cell_)) + 1;
    buckets_.resize(static_cast<std::size_t>(cols_) * rows_);
    for (int i = 0; i < static_cast<int>(elements.size()); ++i)
      buckets_[bucket(elements[i].x, elements[i].y)].push_back(i);
  }

  // Candidate ids (ascending) in the 3x3 bucket block around (x, y).
  void candidates(double x, double y, std::vector<int>& out) const {
    out.clear();
    if (buckets_.empty()) return;
    const int cx = static_cast<int>(std::floor((x - min_x_) / cell_));
    const int cy = static_cast<int>(std::floor((y - min_y_) / cell_));
    for (int by = cy - 1; by <= cy + 1; ++by) {
      if (by < 0 || by >= rows_) continue;
      for (int bx = cx - 1; bx <= cx + 1; ++bx) {
        if (bx < 0 || bx >= cols_) continue;
        const auto& b = buckets_[static_cast<std::size_t>(by) * cols_ + bx];
        out.insert(out.end(), b.begin(), b.end());
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::size_t bucket(double x, double y) const {
    const int bx = static_cast<int>(std::floor((x - min_x_) / cell_));
    const int by = static_cast<int>(std::floor((y - min_y_) / cell_));
    return static_cast<std::size_t>(by) * cols_ + bx;
  }
  double cell_;
  double min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0;
  int cols_ = 0, rows_ = 0;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace detail

template <typename Visitor>
void for_each_close_element_pair(const RegionGraph& gi, const RegionGraph& gj, double window,
                                 Visitor&& visit) {
  if (gi.elements.empty() || gj.elements.empty() || !(window > 0.0)) return;
  const detail::ElementBuckets buckets(gj.elements, window);
  std::vector<int> cand;
  for (int u = 0; u < static_cast<int>(gi.elements.size()); ++u) {
    const auto& eu = gi.elements[static_cast<std::size_t>(u)];
    buckets.candidates(eu.x, eu.y, cand);
    for (const int v : cand) {
      const auto& ev = gj.elements[static_cast<std::size_t>(v)];
      const double dist = std::hypot(eu.x - ev.x, eu.y - ev.y);
      if (dist < window) visit(u, v, dist);
    }
  }
}

}  // namespace mhc
