#include "mhc/metrics.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "metrics";

void check_grid(Eigen::Index h1, Eigen::Index w1, Eigen::Index h2, Eigen::Index w2, const char* op) {
  if (h1 != h2 || w1 != w2) throw Error(ErrorKind::input, kModule, op, "grids differ in size");
}

double ratio(long inter, long uni) { return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni); }

// Per frame and label: pixel count and overlap with the ground truth.
struct LabelStats {
  long size = 0;
  long overlap = 0;
};

// Greedy selection over `candidates` maximizing `score`.
template <typename Score>
ConsistencyCurve greedy(const std::set<int>& candidates, Score&& score) {
  ConsistencyCurve curve;
  std::vector<int> chosen;
  std::set<int> left = candidates;
  double current = -1.0;
  while (!left.empty()) {
    int best_label = 0;
    double best = -1.0;
    for (const int l : left) {
      chosen.push_back(l);
      const double s = score(chosen);
      chosen.pop_back();
      if (s > best) {
        best = s;
        best_label = l;
      }
    }
    if (!(best > current) || (curve.empty() && best <= 0.0)) break;
    chosen.push_back(best_label);
    left.erase(best_label);
    current = best;
    curve.push_back({static_cast<int>(chosen.size()), best});
  }
  return curve;
}

}  // namespace

double jaccard(const Mask& a, const Mask& b) {
  check_grid(a.rows(), a.cols(), b.rows(), b.cols(), "jaccard");
  return ratio((a && b).count(), (a || b).count());
}

ConsistencyCurve consistency_curve(const LabelGrid& partition, const Mask& gt) {
  check_grid(partition.rows(), partition.cols(), gt.rows(), gt.cols(), "consistency_curve");
  std::map<int, LabelStats> stats;
  for (Eigen::Index y = 0; y < partition.rows(); ++y)
    for (Eigen::Index x = 0; x < partition.cols(); ++x) {
      auto& s = stats[partition(y, x)];
      ++s.size;
      if (gt(y, x)) ++s.overlap;
    }
  const long gt_size = gt.count();
  std::set<int> labels;
  for (const auto& [l, s] : stats) labels.insert(l);
  return greedy(labels, [&](const std::vector<int>& chosen) {
    long size = 0, overlap = 0;
    for (const int l : chosen) {
      size += stats[l].size;
      overlap += stats[l].overlap;
    }
    return ratio(overlap, size + gt_size - overlap);
  });
}

double sequence_consistency(std::span<const LabelGrid> labels, std::span<const Mask> gt, std::span<const int> label_set) {
  if (labels.size() != gt.size())
    throw Error(ErrorKind::input, kModule, "sequence_consistency", "frame count mismatch");
  if (label_set.empty() || labels.empty()) return 0.0;
  const std::set<int> wanted(label_set.begin(), label_set.end());
  double total = 0.0;
  for (std::size_t f = 0; f < labels.size(); ++f) {
    check_grid(labels[f].rows(), labels[f].cols(), gt[f].rows(), gt[f].cols(), "sequence_consistency");
    long inter = 0, uni = 0;
    for (Eigen::Index y = 0; y < labels[f].rows(); ++y)
      for (Eigen::Index x = 0; x < labels[f].cols(); ++x) {
        const bool sel = wanted.count(labels[f](y, x)) > 0;
        const bool g = gt[f](y, x);
        inter += sel && g;
        uni += sel || g;
      }
    total += ratio(inter, uni);
  }
  return total / static_cast<double>(labels.size());
}

ConsistencyCurve sequence_consistency_curve(std::span<const LabelGrid> labels, std::span<const Mask> gt) {
  if (labels.size() != gt.size())
    throw Error(ErrorKind::input, kModule, "sequence_consistency", "frame count mismatch");
  std::set<int> all;
  for (const auto& l : labels)
    for (Eigen::Index k = 0; k < l.size(); ++k) all.insert(l.data()[k]);
  return greedy(all, [&](const std::vector<int>& chosen) { return sequence_consistency(labels, gt, chosen); });
}

Mask boundary_mask(const LabelGrid& labels) {
  const Eigen::Index h = labels.rows(), w = labels.cols();
  Mask m = Mask::Constant(h, w, false);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      m(y, x) = (x + 1 < w && labels(y, x + 1) != labels(y, x)) || (y + 1 < h && labels(y + 1, x) != labels(y, x));
  return m;
}

PrecisionRecall boundary_pr(const Mask& predicted, const Mask& truth, double tol) {
  check_grid(predicted.rows(), predicted.cols(), truth.rows(), truth.cols(), "boundary_pr");
  if (!(tol >= 0.0)) throw Error(ErrorKind::config, kModule, "boundary_pr", "tolerance must be >= 0");
  const int r = static_cast<int>(std::floor(tol));
  const auto h = static_cast<int>(predicted.rows()), w = static_cast<int>(predicted.cols());
  auto matched_fraction = [&](const Mask& from, const Mask& to) {
    long hits = 0, total = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!from(y, x)) continue;
        ++total;
        bool hit = false;
        for (int dy = -r; dy <= r && !hit; ++dy)
          for (int dx = -r; dx <= r && !hit; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            if (dx * dx + dy * dy <= tol * tol && to(yy, xx)) hit = true;
          }
        hits += hit;
      }
    return total == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(total);
  };
  return {matched_fraction(predicted, truth), matched_fraction(truth, predicted)};
}

std::string curve_csv(const ConsistencyCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "efficiency,consistency\n";
  for (const auto& p : curve) os << p.efficiency << ',' << p.consistency << '\n';
  return os.str();
}

}  // namespace mhc
