#include "mhc/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "descriptors";

int clamp_to(int v, int size) { return std::clamp(v, 0, size - 1); }

// Quarter-pi turns of a quantized angle, in [0, 8).
int octant(double theta) {
  long k = std::lround(theta / (std::numbers::pi / 4.0)) % 8;
  if (k < 0) k += 8;
  return static_cast<int>(k);
}

// cos(k pi / 4) with exact zeros and an even table.
constexpr double kCosOctant[8] = {1.0, std::numbers::sqrt2 / 2.0, 0.0, -std::numbers::sqrt2 / 2.0,
                                  -1.0, -std::numbers::sqrt2 / 2.0, 0.0, std::numbers::sqrt2 / 2.0};

// Fixed-point scale for the inter reductions: integer sums are exact, so the
// result does not depend on the order element pairs are visited in.
constexpr double kFixedScale = 1099511627776.0;  // 2^40

}  // namespace

Eigen::VectorXd DescriptorConfig::variances() const {
  Eigen::VectorXd v(feature_dims());
  v.head(color_dims()).setConstant(var_color);
  v.segment(color_dims(), shape_dims).setConstant(var_shape);
  v.tail<2>().setConstant(var_position);
  return v;
}

double intra_similarity(double alpha, double bc) { return alpha * (1.0 - std::exp(1.0 - bc)); }

Plane gaussian_smooth(const Plane& plane, double sigma) {
  if (!(sigma > 0.0)) return plane;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k)
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (auto& w : kernel) w /= total;

  const int h = static_cast<int>(plane.rows());
  const int w = static_cast<int>(plane.cols());
  Plane horizontal(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += kernel[static_cast<std::size_t>(k + radius)] * plane(y, clamp_to(x + k, w));
      horizontal(y, x) = s;
    }
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += kernel[static_cast<std::size_t>(k + radius)] * horizontal(clamp_to(y + k, h), x);
      out(y, x) = s;
    }
  return out;
}

GradientField compute_gradients(const Image& image, double sigma) {
  const Plane s = gaussian_smooth(image.gray(), sigma);
  const int h = image.height();
  const int w = image.width();
  GradientField g{Plane(h, w), Plane(h, w)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      g.gx(y, x) = 0.5 * (s(y, clamp_to(x + 1, w)) - s(y, clamp_to(x - 1, w)));
      g.gy(y, x) = 0.5 * (s(clamp_to(y + 1, h), x) - s(clamp_to(y - 1, h), x));
    }
  return g;
}

int orientation_bin(double gx, double gy) { return octant(std::atan2(gy, gx)); }

ElementFeature element_feature(const Image& image, const GradientField& gradients, const ContourElement& element,
                               int cell, int half_disk, int bins) {
  if (cell < 1 || half_disk < 1)
    throw Error(ErrorKind::config, kModule, "element_feature", "cell and half_disk must be >= 1");
  const int w = image.width();
  const int h = image.height();
  const int cdims = 3 * bins;
  ElementFeature f{Eigen::VectorXd::Zero(cdims + DescriptorConfig::shape_dims + 2)};

  // Color: one histogram per half-disk, each channel normalized, averaged.
  const double nx = std::cos(element.theta);
  const double ny = std::sin(element.theta);
  Histogram sides[2] = {Histogram::Zero(cdims), Histogram::Zero(cdims)};
  const int r = half_disk;
  for (int py = static_cast<int>(std::floor(element.y)) - r; py <= static_cast<int>(std::ceil(element.y)) + r; ++py)
    for (int px = static_cast<int>(std::floor(element.x)) - r; px <= static_cast<int>(std::ceil(element.x)) + r; ++px) {
      const double dx = px - element.x;
      const double dy = py - element.y;
      if (dx * dx + dy * dy > static_cast<double>(r) * r) continue;
      const double side = dx * nx + dy * ny;
      if (std::abs(side) < 1e-9) continue;
      accumulate(sides[side > 0.0 ? 1 : 0], image.at(clamp_to(px, w), clamp_to(py, h)), bins);
    }
  for (auto& s : sides)
    for (int c = 0; c < 3; ++c) {
      const double total = s.segment(c * bins, bins).sum();
      if (total > 0.0) s.segment(c * bins, bins) /= total;
    }
  f.values.head(cdims) = 0.5 * (sides[0] + sides[1]);

  // Shape: magnitude-weighted orientation histogram over the cell.
  Eigen::Matrix<double, 8, 1> shape = Eigen::Matrix<double, 8, 1>::Zero();
  const int x0 = static_cast<int>(std::ceil(element.x - 0.5 * cell));
  const int y0 = static_cast<int>(std::ceil(element.y - 0.5 * cell));
  for (int py = y0; py < y0 + cell; ++py)
    for (int px = x0; px < x0 + cell; ++px) {
      const int cx = clamp_to(px, w), cy = clamp_to(py, h);
      const double gx = gradients.gx(cy, cx), gy = gradients.gy(cy, cx);
      const double mag = std::hypot(gx, gy);
      if (mag < 1e-9) continue;
      shape[orientation_bin(gx, gy)] += mag;
    }
  const double norm = shape.norm();
  if (norm > 0.0) shape /= norm;
  f.values.segment(cdims, DescriptorConfig::shape_dims) = shape;

  f.values[cdims + DescriptorConfig::shape_dims] = element.x;
  f.values[cdims + DescriptorConfig::shape_dims + 1] = element.y;
  return f;
}

std::vector<ElementFeature> element_features(const Image& image, const GradientField& gradients,
                                             const RegionGraph& graph, const DescriptorConfig& config) {
  std::vector<ElementFeature> out;
  out.reserve(graph.elements.size());
  for (const auto& e : graph.elements)
    out.push_back(element_feature(image, gradients, e, config.cell, config.half_disk, config.bins));
  return out;
}

double inter_element_similarity(const ElementFeature& fu, const ElementFeature& fv,
                                const Eigen::VectorXd& variances, double window) {
  if (fu.values.size() != fv.values.size() || variances.size() != fu.values.size())
    throw Error(ErrorKind::input, kModule, "inter_element_similarity", "feature dimensions differ");
  if ((variances.array() <= 0.0).any())
    throw Error(ErrorKind::config, kModule, "inter_element_similarity", "variances must be positive");
  const Eigen::Vector2d dp = fu.position() - fv.position();
  if (!(std::hypot(dp.x(), dp.y()) < window)) return 0.0;
  const Eigen::ArrayXd d = (fu.values - fv.values).array();
  return std::exp(-(d * d / variances.array()).sum());
}

AffinityMatrix assemble_affinity(const BoundaryVariableSet& vars, std::span<const PartitionView> parts,
                                 const DescriptorConfig& config) {
  if (static_cast<int>(parts.size()) != vars.image_count())
    throw Error(ErrorKind::input, kModule, "assemble_affinity", "one partition view per image required");
  AffinityMatrix out;
  const auto n = static_cast<std::size_t>(vars.size());
  out.q.assign(n, 0.0);
  out.kind.resize(n);
  out.matched_pairs.assign(n, 0);
  for (int id = 0; id < vars.size(); ++id) out.kind[static_cast<std::size_t>(id)] = vars[id].kind;

  for (int i = 0; i < vars.image_count(); ++i) {
    const auto& p = parts[static_cast<std::size_t>(i)];
    const auto hist = region_histograms(*p.image, *p.regions, config.bins);
    for (const int id : vars.intra_ids(i)) {
      const auto& v = vars[id];
      const double bc = bhattacharyya_coefficient(hist[static_cast<std::size_t>(v.a.region)],
                                                  hist[static_cast<std::size_t>(v.b.region)]);
      out.q[static_cast<std::size_t>(id)] = intra_similarity(v.alpha, bc);
    }
  }

  const Eigen::VectorXd variances = config.variances();
  std::vector<long long> fixed(n, 0);
  for (int i = 0; i < vars.image_count(); ++i)
    for (int j = i + 1; j < vars.image_count(); ++j) {
      const auto& pi = parts[static_cast<std::size_t>(i)];
      const auto& pj = parts[static_cast<std::size_t>(j)];
      const int ni = vars.region_count(i), nj = vars.region_count(j);
      std::vector<int> table(static_cast<std::size_t>(ni) * nj, -1);
      for (const int id : vars.inter_ids()) {
        const auto& v = vars[id];
        if (v.a.image == i && v.b.image == j) table[static_cast<std::size_t>(v.a.region) * nj + v.b.region] = id;
      }
      for_each_close_element_pair(*pi.graph, *pj.graph, config.window, [&](int u, int v, double) {
        const double w = inter_element_similarity((*pi.features)[static_cast<std::size_t>(u)],
                                                  (*pj.features)[static_cast<std::size_t>(v)], variances,
                                                  config.window);
        if (w == 0.0) return;
        const auto& eu = pi.graph->elements[static_cast<std::size_t>(u)];
        const auto& ev = pj.graph->elements[static_cast<std::size_t>(v)];
        const int ku = octant(eu.theta), kv = octant(ev.theta);
        // Outward normal of the lower region is theta, of the higher theta + pi.
        for (int su = 0; su < 2; ++su)
          for (int sv = 0; sv < 2; ++sv) {
            const int m = su ? eu.region_b : eu.region_a;
            const int k = sv ? ev.region_b : ev.region_a;
            const int id = table[static_cast<std::size_t>(m) * nj + k];
            if (id < 0) continue;
            const int turn = ((kv + 4 * sv) - (ku + 4 * su) + 16) % 8;
            fixed[static_cast<std::size_t>(id)] += std::llround(w * kCosOctant[turn] * kFixedScale);
            ++out.matched_pairs[static_cast<std::size_t>(id)];
          }
      });
    }
  for (const int id : vars.inter_ids()) {
    const auto s = static_cast<std::size_t>(id);
    out.q[s] = static_cast<double>(fixed[s]) / kFixedScale - config.mu * static_cast<double>(out.matched_pairs[s]);
  }
  return out;
}

}  // namespace mhc
