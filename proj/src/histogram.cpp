#include "mhc/histogram.hpp"

#include <cmath>

#include "mhc/error.hpp"

namespace mhc {

std::vector<Histogram> region_histograms(const Image& image, const LabelMap& regions, int bins) {
  if (image.width() != regions.width() || image.height() != regions.height())
    throw Error(ErrorKind::input, "descriptors", "region_histograms", "image and label map sizes differ");
  std::vector<Histogram> hists(static_cast<std::size_t>(regions.region_count()), Histogram::Zero(3 * bins));
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      accumulate(hists[static_cast<std::size_t>(regions(x, y))], image.at(x, y), bins);
  for (auto& h : hists) h /= h.sum();
  return hists;
}

double bhattacharyya_coefficient(const Histogram& h1, const Histogram& h2) {
  if (h1.size() != h2.size())
    throw Error(ErrorKind::input, "descriptors", "bhattacharyya_coefficient", "histogram sizes differ");
  constexpr double tol = 1e-9;
  if ((h1.array() < 0.0).any() || (h2.array() < 0.0).any() || std::abs(h1.sum() - 1.0) > tol ||
      std::abs(h2.sum() - 1.0) > tol)
    throw Error(ErrorKind::input, "descriptors", "bhattacharyya_coefficient", "histogram not normalized");
  return (h1.array() * h2.array()).sqrt().sum();
}

}  // namespace mhc
