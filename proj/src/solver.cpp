#include "mhc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "mhc/error.hpp"
#include "mhc/rational.hpp"
#include "mhc/simplex.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "solver";

double to_double(double v) { return v; }
double to_double(const Rational& v) { return v.convert_to<double>(); }

using Fixings = std::vector<std::int8_t>;

// Triangle rows kept out of the LP until violated; shared across the
// branch-and-bound tree, only ever growing.
struct ActiveSet {
  std::vector<bool> active;
};

struct Relaxation {
  SolveStatus status = SolveStatus::optimal;
  std::vector<double> values;
  double objective = 0.0;
  int infeasible_row = -1;
};

template <typename Scalar>
Scalar from_int(std::int64_t v) {
  if constexpr (std::is_floating_point_v<Scalar>)
    return static_cast<Scalar>(v);
  else
    return to_rational(v);
}

template <typename Scalar>
Scalar from_double(double v) {
  if constexpr (std::is_floating_point_v<Scalar>)
    return v;
  else
    return to_rational(v);
}

template <typename Scalar>
Relaxation relax_with(const LpProblem& p, const Fixings& fixed, const SolverConfig& config, ActiveSet& active) {
  const bool exact = !std::is_floating_point_v<Scalar>;
  const Scalar tol = exact ? Scalar(0) : from_double<Scalar>(config.tolerance);
  const int n = p.size();
  std::vector<int> column(static_cast<std::size_t>(n), -1);
  std::vector<int> var_of;
  for (int v = 0; v < n; ++v)
    if (fixed[static_cast<std::size_t>(v)] < 0) {
      column[static_cast<std::size_t>(v)] = static_cast<int>(var_of.size());
      var_of.push_back(v);
    }
  const int cols = static_cast<int>(var_of.size());

  for (;;) {
    Relaxation out;
    std::vector<Scalar> lower(static_cast<std::size_t>(cols), Scalar(0));
    std::vector<Scalar> upper(static_cast<std::size_t>(cols), Scalar(1));
    std::vector<Scalar> cost(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c)
      cost[static_cast<std::size_t>(c)] = from_double<Scalar>(p.objective[static_cast<std::size_t>(var_of[static_cast<std::size_t>(c)])]);

    struct Row {
      std::vector<std::pair<int, Scalar>> terms;
      bool equality;
      Scalar rhs;
      int source;
    };
    std::vector<Row> rows;
    int bound_conflict = -1;
    for (int k = 0; k < static_cast<int>(p.constraints.size()) && bound_conflict < 0; ++k) {
      const auto& con = p.constraints[static_cast<std::size_t>(k)];
      if (con.tag == Provenance::triangle && !active.active[static_cast<std::size_t>(k)]) continue;
      std::int64_t rhs = con.rhs;
      std::vector<std::pair<int, Scalar>> terms;
      for (const auto& t : con.terms) {
        const auto f = fixed[static_cast<std::size_t>(t.var)];
        if (f >= 0)
          rhs -= t.coef * f;
        else
          terms.push_back({column[static_cast<std::size_t>(t.var)], from_int<Scalar>(t.coef)});
      }
      const bool eq = con.kind == ConstraintKind::equal;
      if (terms.empty()) {
        if (eq ? rhs != 0 : rhs < 0) bound_conflict = k;
        continue;
      }
      if (terms.size() == 1) {
        const auto& [c, a] = terms.front();
        const Scalar b = from_int<Scalar>(rhs) / a;
        auto& lo = lower[static_cast<std::size_t>(c)];
        auto& up = upper[static_cast<std::size_t>(c)];
        if (eq || a > Scalar(0)) up = std::min(up, b);
        if (eq || a < Scalar(0)) lo = std::max(lo, b);
        if (lo > up + tol) bound_conflict = k;
        if (!exact && lo > up) up = lo;
        continue;
      }
      Scalar rhs_s = from_int<Scalar>(rhs);
      if constexpr (!std::is_floating_point_v<Scalar>) {
        rows.push_back({std::move(terms), eq, rhs_s, k});
      } else {
        double scale = 0.0;
        for (const auto& t : terms) scale = std::max(scale, std::abs(t.second));
        for (auto& t : terms) t.second /= scale;
        rows.push_back({std::move(terms), eq, rhs_s / scale, k});
      }
    }
    if (bound_conflict >= 0) {
      out.status = SolveStatus::infeasible;
      out.infeasible_row = bound_conflict;
      return out;
    }

    BoundedSimplex<Scalar> lp(cost, lower, upper, tol);
    lp.set_iteration_limit(config.iteration_limit);
    lp.set_refactor_interval(config.refactor_every);
    for (const auto& r : rows) lp.add_row(r.terms, r.equality, r.rhs);
    auto res = lp.solve();
    if (res.status == SimplexStatus::iteration_limit) {
      out.status = SolveStatus::iteration_limit;
      return out;
    }
    if (res.status == SimplexStatus::infeasible) {
      out.status = SolveStatus::infeasible;
      out.infeasible_row = rows[static_cast<std::size_t>(res.infeasible_row)].source;
      return out;
    }

    std::vector<Scalar> x(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      const auto f = fixed[static_cast<std::size_t>(v)];
      x[static_cast<std::size_t>(v)] = f >= 0 ? Scalar(f) : res.x[static_cast<std::size_t>(column[static_cast<std::size_t>(v)])];
    }

    bool added = false;
    for (int k = 0; k < static_cast<int>(p.constraints.size()); ++k) {
      const auto& con = p.constraints[static_cast<std::size_t>(k)];
      if (con.tag != Provenance::triangle || active.active[static_cast<std::size_t>(k)]) continue;
      Scalar act(0);
      for (const auto& t : con.terms) act += from_int<Scalar>(t.coef) * x[static_cast<std::size_t>(t.var)];
      if (act > from_int<Scalar>(con.rhs) + tol) {
        active.active[static_cast<std::size_t>(k)] = true;
        added = true;
      }
    }
    if (added) continue;

    Scalar obj(0);
    out.values.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      auto& xv = x[static_cast<std::size_t>(v)];
      if constexpr (std::is_floating_point_v<Scalar>) {
        if (std::abs(xv) <= config.tolerance) xv = 0.0;
        if (std::abs(xv - 1.0) <= config.tolerance) xv = 1.0;
      }
      obj += from_double<Scalar>(p.objective[static_cast<std::size_t>(v)]) * xv;
      out.values[static_cast<std::size_t>(v)] = to_double(xv);
    }
    out.objective = to_double(obj);
    if (is_integral(out.values)) out.objective = objective_value(p, out.values);
    return out;
  }
}

class Relaxer {
 public:
  Relaxer(const LpProblem& p, const SolverConfig& config) : p_(p), config_(config) {
    active_.active.assign(p.constraints.size(), !config.lazy_triangles);
    const auto free_count = std::count(p.fixed.begin(), p.fixed.end(), std::int8_t{-1});
    exact_ = free_count <= config.exact_limit;
  }

  bool exact() const { return exact_; }

  Relaxation operator()(const Fixings& fixed) {
    return exact_ ? relax_with<Rational>(p_, fixed, config_, active_) : relax_with<double>(p_, fixed, config_, active_);
  }

 private:
  const LpProblem& p_;
  const SolverConfig& config_;
  ActiveSet active_;
  bool exact_ = true;
};

Solution to_solution(Relaxation r, long nodes) {
  Solution s;
  s.status = r.status;
  s.values = std::move(r.values);
  s.objective = r.objective;
  s.infeasible_row = r.infeasible_row;
  s.nodes = nodes;
  return s;
}

// Unit propagation over integer constraints; -1 marks a free variable.
class Propagator {
 public:
  explicit Propagator(const LpProblem& p) : p_(p), uses_(static_cast<std::size_t>(p.size())) {
    for (int k = 0; k < static_cast<int>(p.constraints.size()); ++k)
      for (const auto& t : p.constraints[static_cast<std::size_t>(k)].terms) uses_[static_cast<std::size_t>(t.var)].push_back(k);
  }

  /// Returns false on conflict. `changed` seeds the queue.
  bool run(Fixings& b, std::vector<int> changed) const {
    std::vector<bool> queued(p_.constraints.size(), false);
    std::vector<int> queue;
    auto enqueue_var = [&](int v) {
      for (const int k : uses_[static_cast<std::size_t>(v)])
        if (!queued[static_cast<std::size_t>(k)]) {
          queued[static_cast<std::size_t>(k)] = true;
          queue.push_back(k);
        }
    };
    for (const int v : changed) enqueue_var(v);
    while (!queue.empty()) {
      const int k = queue.back();
      queue.pop_back();
      queued[static_cast<std::size_t>(k)] = false;
      const auto& con = p_.constraints[static_cast<std::size_t>(k)];
      for (const int sign : {1, -1}) {
        if (sign < 0 && con.kind != ConstraintKind::equal) break;
        // sign * sum(a b) <= sign * rhs
        std::int64_t min_act = 0;
        for (const auto& t : con.terms) {
          const std::int64_t a = sign * t.coef;
          const auto v = b[static_cast<std::size_t>(t.var)];
          if (v >= 0)
            min_act += a * v;
          else if (a < 0)
            min_act += a;
        }
        const std::int64_t rhs = sign * con.rhs;
        if (min_act > rhs) return false;
        for (const auto& t : con.terms) {
          const std::int64_t a = sign * t.coef;
          auto& v = b[static_cast<std::size_t>(t.var)];
          if (v >= 0) continue;
          if (a > 0 && min_act + a > rhs) {
            v = 0;
            enqueue_var(t.var);
          } else if (a < 0 && min_act - a > rhs) {
            v = 1;
            enqueue_var(t.var);
          }
        }
      }
    }
    return true;
  }

 private:
  const LpProblem& p_;
  std::vector<std::vector<int>> uses_;
};

// Rounds the relaxation variable by variable, most decided first, and
// repairs with propagation; tries the other value once on conflict.
std::optional<std::vector<std::uint8_t>> rounding_dive(const LpProblem& p, const Propagator& prop, const Fixings& fixed,
                                                       const std::vector<double>& values) {
  Fixings b = fixed;
  std::vector<int> all(static_cast<std::size_t>(p.size()));
  std::iota(all.begin(), all.end(), 0);
  if (!prop.run(b, all)) return std::nullopt;
  std::vector<int> order = all;
  std::stable_sort(order.begin(), order.end(), [&](int u, int v) {
    return std::abs(values[static_cast<std::size_t>(u)] - 0.5) > std::abs(values[static_cast<std::size_t>(v)] - 0.5);
  });
  for (const int v : order) {
    if (b[static_cast<std::size_t>(v)] >= 0) continue;
    const std::int8_t guess = values[static_cast<std::size_t>(v)] >= 0.5 ? 1 : 0;
    bool ok = false;
    for (const std::int8_t value : {guess, static_cast<std::int8_t>(1 - guess)}) {
      Fixings trial = b;
      trial[static_cast<std::size_t>(v)] = value;
      if (prop.run(trial, {v})) {
        b = std::move(trial);
        ok = true;
        break;
      }
    }
    if (!ok) return std::nullopt;
  }
  std::vector<std::uint8_t> out(b.begin(), b.end());
  if (!is_feasible(p, out)) return std::nullopt;
  return out;
}

int most_fractional(const std::vector<double>& values) {
  int best = -1;
  double best_dist = 1.0;
  for (int v = 0; v < static_cast<int>(values.size()); ++v) {
    const double x = values[static_cast<std::size_t>(v)];
    if (x == 0.0 || x == 1.0) continue;
    const double d = std::abs(x - 0.5);
    if (d < best_dist) {
      best = v;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace

LpProblem::LpProblem(std::vector<double> q) : objective(std::move(q)), fixed(objective.size(), -1) {}

void LpProblem::validate() const {
  if (fixed.size() != objective.size())
    throw Error(ErrorKind::internal, kModule, "validate", "fixing map does not match the variable count");
  std::vector<int> seen(objective.size(), -1);
  for (int k = 0; k < static_cast<int>(constraints.size()); ++k)
    for (const auto& t : constraints[static_cast<std::size_t>(k)].terms) {
      if (t.var < 0 || t.var >= size())
        throw Error(ErrorKind::internal, kModule, "validate", "constraint " + std::to_string(k) + " references an undeclared variable");
      if (t.coef == 0)
        throw Error(ErrorKind::internal, kModule, "validate", "constraint " + std::to_string(k) + " has a zero coefficient");
      if (seen[static_cast<std::size_t>(t.var)] == k)
        throw Error(ErrorKind::internal, kModule, "validate", "constraint " + std::to_string(k) + " repeats a variable");
      seen[static_cast<std::size_t>(t.var)] = k;
    }
}

std::vector<std::uint8_t> Solution::binary() const {
  std::vector<std::uint8_t> b(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) b[i] = values[i] > 0.5 ? 1 : 0;
  return b;
}

double objective_value(const LpProblem& p, std::span<const double> values) {
  double s = 0.0;
  for (int v = 0; v < p.size(); ++v) s += p.objective[static_cast<std::size_t>(v)] * values[static_cast<std::size_t>(v)];
  return s;
}

bool is_feasible(const LpProblem& p, std::span<const std::uint8_t> b) {
  if (static_cast<int>(b.size()) != p.size()) return false;
  for (int v = 0; v < p.size(); ++v) {
    const auto f = p.fixed[static_cast<std::size_t>(v)];
    if (b[static_cast<std::size_t>(v)] > 1 || (f >= 0 && b[static_cast<std::size_t>(v)] != f)) return false;
  }
  return std::all_of(p.constraints.begin(), p.constraints.end(), [&](const LinearConstraint& c) { return c.satisfied(b); });
}

bool is_integral(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

Solution solve_relaxation(const LpProblem& p, const SolverConfig& config) {
  p.validate();
  Relaxer relax(p, config);
  return to_solution(relax(p.fixed), 1);
}

Solution solve_binary(const LpProblem& p, const SolverConfig& config) {
  p.validate();
  Relaxer relax(p, config);
  Relaxation root = relax(p.fixed);
  if (root.status != SolveStatus::optimal || is_integral(root.values)) return to_solution(std::move(root), 1);

  long nodes = 1;
  const Propagator prop(p);
  std::optional<std::vector<double>> incumbent;
  double incumbent_obj = 0.0;
  auto try_dive = [&](const Fixings& fixed, const std::vector<double>& values) {
    const auto dive = rounding_dive(p, prop, fixed, values);
    if (!dive) return;
    std::vector<double> x(dive->begin(), dive->end());
    const double obj = objective_value(p, x);
    if (!incumbent || obj < incumbent_obj) {
      incumbent = std::move(x);
      incumbent_obj = obj;
    }
  };
  try_dive(p.fixed, root.values);
  const double slack = relax.exact() ? 0.0 : config.tolerance;
  auto pruned = [&](double bound) { return incumbent && bound >= incumbent_obj - slack; };

  struct Node {
    double bound;
    long seq;
    Fixings fixed;
    std::vector<double> values;
  };
  auto worse = [](const Node& a, const Node& b) { return a.bound != b.bound ? a.bound > b.bound : a.seq > b.seq; };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  long seq = 0;
  open.push({root.objective, seq++, p.fixed, std::move(root.values)});
  bool exhausted = true;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (pruned(node.bound)) continue;
    if (nodes >= config.node_limit) {
      exhausted = false;
      break;
    }
    const int v = most_fractional(node.values);
    for (const std::int8_t value : {std::int8_t{0}, std::int8_t{1}}) {
      Fixings child = node.fixed;
      child[static_cast<std::size_t>(v)] = value;
      if (!prop.run(child, {v})) continue;
      Relaxation r = relax(child);
      ++nodes;
      if (r.status == SolveStatus::iteration_limit) {
        exhausted = false;
        continue;
      }
      if (r.status != SolveStatus::optimal || pruned(r.objective)) continue;
      if (is_integral(r.values)) {
        incumbent_obj = r.objective;
        incumbent = std::move(r.values);
        continue;
      }
      try_dive(child, r.values);
      if (pruned(r.objective)) continue;
      open.push({r.objective, seq++, std::move(child), std::move(r.values)});
    }
  }

  Solution s;
  s.nodes = nodes;
  if (!incumbent) {
    s.status = exhausted ? SolveStatus::infeasible : SolveStatus::node_limit;
    return s;
  }
  s.status = exhausted ? SolveStatus::optimal : SolveStatus::node_limit;
  s.values = std::move(*incumbent);
  s.objective = incumbent_obj;
  return s;
}

Solution brute_force(const LpProblem& p) {
  p.validate();
  const int n = p.size();
  if (n > 24) throw Error(ErrorKind::config, kModule, "brute_force", "more than 24 variables");
  Solution best;
  best.status = SolveStatus::infeasible;
  std::vector<std::uint8_t> b(static_cast<std::size_t>(n));
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 0; k < count; ++k) {
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((k >> (n - 1 - i)) & 1U);
    if (!is_feasible(p, b)) continue;
    const std::vector<double> values(b.begin(), b.end());
    const double obj = objective_value(p, values);
    if (best.status == SolveStatus::infeasible || obj < best.objective) {
      best.status = SolveStatus::optimal;
      best.values = values;
      best.objective = obj;
    }
  }
  best.nodes = static_cast<long>(count);
  return best;
}

}  // namespace mhc
