#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mhc/adjacency.hpp"
#include "mhc/histogram.hpp"
#include "mhc/raster.hpp"

namespace mhc {

struct DescriptorConfig {
  int bins = 8;
  /// Side of the square gradient cell, pixels.
  int cell = 16;
  /// Radius of the two color half-disks, pixels.
  int half_disk = 4;
  /// Inter matching window, pixels.
  double window = 20.0;
  /// Regularization subtracted per matched element pair.
  double mu = 0.2;
  double var_color = 0.05;
  double var_shape = 0.05;
  double var_position = 25.0;
  double smoothing_sigma = 1.0;

  int color_dims() const { return 3 * bins; }
  static constexpr int shape_dims = 8;
  int feature_dims() const { return color_dims() + shape_dims + 2; }
  /// Diagonal of Sigma, one variance per feature dimension.
  Eigen::VectorXd variances() const;
};

/// W_ii(m, n) = alpha (1 - e^{1 - bc}).
double intra_similarity(double alpha, double bc);

/// Centered-difference gradients of the Gaussian-smoothed luma.
struct GradientField {
  Plane gx;
  Plane gy;
};

/// Separable Gaussian smoothing with clamped borders, radius ceil(3 sigma).
Plane gaussian_smooth(const Plane& plane, double sigma);
GradientField compute_gradients(const Image& image, double sigma = 1.0);

/// Feature of one contour element: [color (3*bins) | shape (8) | x, y].
struct ElementFeature {
  Eigen::VectorXd values;

  auto color(int bins = 8) const { return values.head(3 * bins); }
  auto shape(int bins = 8) const { return values.segment(3 * bins, DescriptorConfig::shape_dims); }
  auto position() const { return values.tail<2>(); }
};

/// Orientation bin of a gradient: 8 signed bins centered on k*pi/4.
int orientation_bin(double gx, double gy);

ElementFeature element_feature(const Image& image, const GradientField& gradients, const ContourElement& element,
                               int cell, int half_disk, int bins = 8);
std::vector<ElementFeature> element_features(const Image& image, const GradientField& gradients,
                                             const RegionGraph& graph, const DescriptorConfig& config);

/// exp(-d^T Sigma^{-1} d) when the position blocks are strictly closer than
/// `window`, exactly 0 otherwise.
double inter_element_similarity(const ElementFeature& fu, const ElementFeature& fv,
                                 const Eigen::VectorXd& variances, double window);

/// Everything the affinity assembly needs to know about one image.
struct PartitionView {
  const Image* image = nullptr;
  const LabelMap* regions = nullptr;
  const RegionGraph* graph = nullptr;
  const std::vector<ElementFeature>* features = nullptr;
};

/// Objective coefficient per boundary variable id.
struct AffinityMatrix {
  std::vector<double> q;
  std::vector<VarKind> kind;
  /// Number of element pairs feeding each inter coefficient (0 for intra).
  std::vector<long> matched_pairs;
};

AffinityMatrix assemble_affinity(const BoundaryVariableSet& vars, std::span<const PartitionView> parts,
                                 const DescriptorConfig& config);

}  // namespace mhc
