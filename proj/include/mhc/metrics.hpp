#pragma once

#include <span>
#include <string>
#include <vector>

#include "mhc/raster.hpp"

namespace mhc {

/// |A n B| / |A u B|; 1 when both sets are empty.
double jaccard(const Mask& a, const Mask& b);

struct CurvePoint {
  int efficiency = 0;
  double consistency = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};
using ConsistencyCurve = std::vector<CurvePoint>;

/// Greedy region selection: each step adds the label with the largest
/// Jaccard against `gt` (lowest label on ties) while it still improves.
ConsistencyCurve consistency_curve(const LabelGrid& partition, const Mask& gt);

/// Mean over frames of Jaccard(pixels carrying any of `label_set`, gt).
/// An empty label set scores 0.
double sequence_consistency(std::span<const LabelGrid> labels, std::span<const Mask> gt,
                            std::span<const int> label_set);

/// Greedy curve over label sets, scored with sequence_consistency.
ConsistencyCurve sequence_consistency_curve(std::span<const LabelGrid> labels, std::span<const Mask> gt);

/// Pixels whose right or lower neighbor carries a different label.
Mask boundary_mask(const LabelGrid& labels);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
};

/// Matches boundary pixels within Euclidean distance `tol`. An empty
/// prediction has precision 1, an empty ground truth recall 1.
PrecisionRecall boundary_pr(const Mask& predicted, const Mask& truth, double tol = 2.0);

/// "efficiency,consistency" rows with a header.
std::string curve_csv(const ConsistencyCurve& curve);

}  // namespace mhc
