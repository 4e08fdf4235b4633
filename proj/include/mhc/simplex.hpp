#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mhc/error.hpp"

namespace mhc {

enum class SimplexStatus : std::uint8_t { optimal, infeasible, iteration_limit };

template <typename Scalar>
struct SimplexResult {
  SimplexStatus status = SimplexStatus::optimal;
  /// Structural values.
  std::vector<Scalar> x;
  /// Row holding a positive artificial at the end of phase 1.
  int infeasible_row = -1;
  long iterations = 0;
};

/// Bounded-variable revised simplex with an explicit dense basis inverse and
/// Bland's rule. Structural columns carry finite bounds; every row gets a
/// slack (<= rows) and, where the slack cannot start basic, a phase-1
/// artificial. With an exact Scalar the tolerance is 0.
template <typename Scalar>
class BoundedSimplex {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Column = std::vector<std::pair<int, Scalar>>;

  BoundedSimplex(std::vector<Scalar> cost, std::vector<Scalar> lower, std::vector<Scalar> upper, Scalar tolerance)
      : n_(static_cast<int>(cost.size())), tol_(std::move(tolerance)), cost_(std::move(cost)),
        lower_(std::move(lower)), upper_(std::move(upper)), cols_(static_cast<std::size_t>(n_)) {
    finite_upper_.assign(static_cast<std::size_t>(n_), true);
  }

  /// sum(a_j x_j) (== if `equality`, else <=) rhs. Terms reference distinct
  /// structural columns.
  void add_row(const std::vector<std::pair<int, Scalar>>& terms, bool equality, Scalar rhs) {
    const int r = static_cast<int>(rhs_.size());
    for (const auto& [j, a] : terms) cols_[static_cast<std::size_t>(j)].push_back({r, a});
    rhs_.push_back(std::move(rhs));
    equality_.push_back(equality);
  }

  void set_iteration_limit(long limit) { iteration_limit_ = limit; }
  void set_refactor_interval(int pivots) { refactor_every_ = pivots; }

  SimplexResult<Scalar> solve() {
    setup();
    SimplexResult<Scalar> res;
    if (!artificial_rows_.empty()) {
      std::vector<Scalar> phase1(static_cast<std::size_t>(total()), Scalar(0));
      for (const int a : artificial_rows_) phase1[static_cast<std::size_t>(artificial_of_row_[static_cast<std::size_t>(a)])] = Scalar(1);
      if (!iterate(phase1, res.iterations)) {
        res.status = SimplexStatus::iteration_limit;
        return res;
      }
      for (const int row : artificial_rows_) {
        const int a = artificial_of_row_[static_cast<std::size_t>(row)];
        if (value_[static_cast<std::size_t>(a)] > tol_) {
          res.status = SimplexStatus::infeasible;
          res.infeasible_row = row;
          return res;
        }
      }
      for (const int row : artificial_rows_) {
        const auto a = static_cast<std::size_t>(artificial_of_row_[static_cast<std::size_t>(row)]);
        upper_[a] = Scalar(0);
        finite_upper_[a] = true;
      }
    }
    std::vector<Scalar> phase2(static_cast<std::size_t>(total()), Scalar(0));
    for (int j = 0; j < n_; ++j) phase2[static_cast<std::size_t>(j)] = cost_[static_cast<std::size_t>(j)];
    if (!iterate(phase2, res.iterations)) {
      res.status = SimplexStatus::iteration_limit;
      return res;
    }
    res.x.assign(value_.begin(), value_.begin() + n_);
    return res;
  }

 private:
  int total() const { return static_cast<int>(cols_.size()); }
  int rows() const { return static_cast<int>(rhs_.size()); }

  void add_column(Column col, Scalar lo, std::optional<Scalar> up) {
    cols_.push_back(std::move(col));
    lower_.push_back(std::move(lo));
    finite_upper_.push_back(up.has_value());
    upper_.push_back(up ? *up : Scalar(0));
  }

  void setup() {
    const int m = rows();
    // Residual with every structural at its lower bound.
    std::vector<Scalar> residual = rhs_;
    for (int j = 0; j < n_; ++j)
      if (lower_[static_cast<std::size_t>(j)] != Scalar(0))
        for (const auto& [r, a] : cols_[static_cast<std::size_t>(j)])
          residual[static_cast<std::size_t>(r)] -= a * lower_[static_cast<std::size_t>(j)];

    value_.assign(lower_.begin(), lower_.end());
    basis_.assign(static_cast<std::size_t>(m), -1);
    artificial_of_row_.assign(static_cast<std::size_t>(m), -1);
    binv_ = Matrix::Zero(m, m);
    for (int r = 0; r < m; ++r) {
      const auto rs = static_cast<std::size_t>(r);
      if (!equality_[rs]) {
        add_column({{r, Scalar(1)}}, Scalar(0), std::nullopt);
        value_.push_back(Scalar(0));
        if (residual[rs] >= Scalar(0)) {
          basis_[rs] = total() - 1;
          value_.back() = residual[rs];
          binv_(r, r) = Scalar(1);
          continue;
        }
      }
      const Scalar sign = residual[rs] < Scalar(0) ? Scalar(-1) : Scalar(1);
      add_column({{r, sign}}, Scalar(0), std::nullopt);
      value_.push_back(residual[rs] * sign);
      basis_[rs] = total() - 1;
      artificial_of_row_[rs] = total() - 1;
      artificial_rows_.push_back(r);
      binv_(r, r) = sign;
    }
    in_basis_.assign(static_cast<std::size_t>(total()), -1);
    for (int r = 0; r < m; ++r) in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = r;
    at_upper_.assign(static_cast<std::size_t>(total()), false);
  }

  bool fixed(int j) const {
    const auto s = static_cast<std::size_t>(j);
    return finite_upper_[s] && upper_[s] == lower_[s];
  }

  void refactor() {
    if constexpr (std::is_floating_point_v<Scalar>) {
      const int m = rows();
      if (m == 0) return;
      Matrix b = Matrix::Zero(m, m);
      for (int r = 0; r < m; ++r)
        for (const auto& [row, a] : cols_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])]) b(row, r) = a;
      binv_ = b.partialPivLu().inverse();
      // x_B = B^-1 (rhs - N x_N)
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> resid(m);
      for (int r = 0; r < m; ++r) resid(r) = rhs_[static_cast<std::size_t>(r)];
      for (int j = 0; j < total(); ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
        const Scalar& v = value_[static_cast<std::size_t>(j)];
        if (v == Scalar(0)) continue;
        for (const auto& [row, a] : cols_[static_cast<std::size_t>(j)]) resid(row) -= a * v;
      }
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> xb = binv_ * resid;
      for (int r = 0; r < m; ++r) value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = xb(r);
    }
  }

  // Returns false on iteration limit.
  bool iterate(const std::vector<Scalar>& c, long& iterations) {
    const int m = rows();
    std::vector<Scalar> y(static_cast<std::size_t>(m));
    std::vector<Scalar> alpha(static_cast<std::size_t>(m));
    int since_refactor = 0;
    for (;;) {
      if (iterations >= iteration_limit_) return false;
      // Duals y^T = c_B^T B^-1.
      for (int k = 0; k < m; ++k) y[static_cast<std::size_t>(k)] = Scalar(0);
      for (int r = 0; r < m; ++r) {
        const Scalar& cb = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
        if (cb == Scalar(0)) continue;
        for (int k = 0; k < m; ++k) y[static_cast<std::size_t>(k)] += cb * binv_(r, k);
      }
      // Bland: first improving nonbasic column.
      int enter = -1;
      int dir = 0;
      for (int j = 0; j < total() && enter < 0; ++j) {
        const auto s = static_cast<std::size_t>(j);
        if (in_basis_[s] >= 0 || fixed(j)) continue;
        Scalar d = c[s];
        for (const auto& [row, a] : cols_[s]) d -= y[static_cast<std::size_t>(row)] * a;
        if (!at_upper_[s] && d < -tol_) {
          enter = j;
          dir = 1;
        } else if (at_upper_[s] && d > tol_) {
          enter = j;
          dir = -1;
        }
      }
      if (enter < 0) return true;
      ++iterations;

      const auto es = static_cast<std::size_t>(enter);
      for (int k = 0; k < m; ++k) alpha[static_cast<std::size_t>(k)] = Scalar(0);
      for (const auto& [row, a] : cols_[es])
        for (int k = 0; k < m; ++k)
          if (binv_(k, row) != Scalar(0)) alpha[static_cast<std::size_t>(k)] += binv_(k, row) * a;

      // Ratio test; a bound flip wins ties, then the smallest leaving index.
      std::optional<Scalar> best;
      if (finite_upper_[es]) best = upper_[es] - lower_[es];
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int r = 0; r < m; ++r) {
        const Scalar& ar = alpha[static_cast<std::size_t>(r)];
        if (!(ar > tol_ || ar < -tol_)) continue;
        const auto b = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
        // Basic variable moves by -dir * ar per unit step.
        const bool decreasing = (dir > 0) == (ar > Scalar(0));
        Scalar limit;
        if (decreasing) {
          limit = (value_[b] - lower_[b]) / (ar > Scalar(0) ? ar : Scalar(-ar));
        } else {
          if (!finite_upper_[b]) continue;
          limit = (upper_[b] - value_[b]) / (ar > Scalar(0) ? ar : Scalar(-ar));
        }
        if (limit < Scalar(0)) limit = Scalar(0);
        bool take = false;
        if (!best) {
          take = true;
        } else if (limit < *best - tol_) {
          take = true;
        } else if (!(limit > *best + tol_) && leave_row >= 0 &&
                   basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave_row)]) {
          take = true;
        }
        if (take) {
          best = limit;
          leave_row = r;
          leave_to_upper = !decreasing;
        }
      }
      if (!best) throw Error(ErrorKind::internal, "solver", "simplex", "unbounded direction in a bounded problem");

      const Scalar step = *best;
      const Scalar signed_step = dir > 0 ? step : Scalar(-step);
      if (step != Scalar(0)) {
        value_[es] += signed_step;
        for (int r = 0; r < m; ++r) {
          const Scalar& ar = alpha[static_cast<std::size_t>(r)];
          if (ar == Scalar(0)) continue;
          value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] -= signed_step * ar;
        }
      }
      if (leave_row < 0) {
        at_upper_[es] = dir > 0;
        value_[es] = dir > 0 ? upper_[es] : lower_[es];
        continue;
      }

      const auto lr = static_cast<std::size_t>(leave_row);
      const auto leaving = static_cast<std::size_t>(basis_[lr]);
      value_[leaving] = leave_to_upper ? upper_[leaving] : lower_[leaving];
      at_upper_[leaving] = leave_to_upper;
      in_basis_[leaving] = -1;
      basis_[lr] = enter;
      in_basis_[es] = leave_row;
      at_upper_[es] = false;

      const Scalar pivot = alpha[lr];
      for (int k = 0; k < m; ++k)
        if (binv_(leave_row, k) != Scalar(0)) binv_(leave_row, k) /= pivot;
      for (int r = 0; r < m; ++r) {
        const Scalar& ar = alpha[static_cast<std::size_t>(r)];
        if (r == leave_row || ar == Scalar(0)) continue;
        for (int k = 0; k < m; ++k)
          if (binv_(leave_row, k) != Scalar(0)) binv_(r, k) -= ar * binv_(leave_row, k);
      }
      if (++since_refactor >= refactor_every_) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  int n_;
  Scalar tol_;
  std::vector<Scalar> cost_;
  std::vector<Scalar> lower_;
  std::vector<Scalar> upper_;
  std::vector<bool> finite_upper_;
  std::vector<Column> cols_;
  std::vector<Scalar> rhs_;
  std::vector<bool> equality_;

  std::vector<Scalar> value_;
  std::vector<int> basis_;
  std::vector<int> in_basis_;
  std::vector<bool> at_upper_;
  std::vector<int> artificial_of_row_;
  std::vector<int> artificial_rows_;
  Matrix binv_;
  long iteration_limit_ = 1'000'000;
  int refactor_every_ = 64;
};

}  // namespace mhc
