#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mhc/adjacency.hpp"
#include "mhc/hierarchy.hpp"

namespace mhc {

enum class ConstraintKind : std::uint8_t { equal, less_equal };

enum class Provenance : std::uint8_t {
  intra_equal,
  intra_subtree,
  triangle,
  band_lo,
  band_hi,
  freeze_sep,
  freeze_merge,
  /// Cut b_uv <= sum of a b = 0 path, added when a solution is not transitive.
  cycle,
  other,
};

std::string_view to_string(Provenance p);

struct Term {
  int var = 0;
  std::int64_t coef = 0;
  friend bool operator==(const Term&, const Term&) = default;
};

/// sum(coef * b_var) (= | <=) rhs. All emitted systems have integer data,
/// which the solver lifts to exact rationals.
struct LinearConstraint {
  ConstraintKind kind = ConstraintKind::less_equal;
  std::vector<Term> terms;
  std::int64_t rhs = 0;
  Provenance tag = Provenance::other;

  std::int64_t activity(std::span<const std::uint8_t> b) const;
  bool satisfied(std::span<const std::uint8_t> b) const;
  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/// Sibling equalities (chained over cross variables sorted by id) and one
/// subtree inequality sum(inner) <= N_m * c_1 per internal node.
std::vector<LinearConstraint> intra_constraints(const Hierarchy& h, const BoundaryVariableSet& vars, int image);

/// Three cyclic inequalities b_xy <= b_xz + b_zy per 3-clique of the
/// combined graph that spans more than one image.
std::vector<LinearConstraint> triangle_constraints(const BoundaryVariableSet& vars);

enum class BandWeighting : std::uint8_t { length, count };

struct Band {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t total = 0;
};

/// [ceil((t - beta) N_b), floor(t N_b)] with N_b the weight total.
Band band_limits(const BoundaryVariableSet& vars, int image, double t, double beta,
                 BandWeighting weighting = BandWeighting::length);

/// band-lo as -sum(w b) <= -lo, band-hi as sum(w b) <= hi.
std::vector<LinearConstraint> band_constraints(const BoundaryVariableSet& vars, int image, double t, double beta,
                                               BandWeighting weighting = BandWeighting::length);

/// Previously realized cluster label of every region of one image.
struct FrozenImage {
  int image = 0;
  std::vector<int> cluster;
};

/// Fixes every variable with both endpoints in frozen images: to 1 when
/// the labels differ (freeze-sep), to 0 when they agree (freeze-merge).
std::vector<LinearConstraint> freeze_constraints(const BoundaryVariableSet& vars, std::span<const FrozenImage> frozen);

/// Stable sort by provenance, preserving emission order within a tag.
void sort_by_provenance(std::vector<LinearConstraint>& constraints);

}  // namespace mhc
