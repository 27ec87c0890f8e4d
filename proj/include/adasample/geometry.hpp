#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace adasample {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when an iterative projection fails to reach its tolerance.
class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProjectionOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

template <typename Scalar>
struct ProjectionResult {
  Vector<Scalar> point;
  int iterations = 0;
  /// Largest distance from `point` to any member set (0 for closed-form sets).
  Scalar residual = 0;
};

/// Closed convex subset of R^n with an exact or iterative Euclidean projection.
///
/// Sets are immutable values; build them through the named factories, which
/// check the descriptor invariants.
template <typename Scalar>
class ConstraintSet {
 public:
  using VectorType = Vector<Scalar>;

  /// All of R^n.
  struct Whole {
    Eigen::Index dim;
  };
  struct NonNegativeOrthant {
    Eigen::Index dim;
  };
  struct Box {
    VectorType lower;
    VectorType upper;
  };
  /// {x : x >= 0, sum(x) = 1}
  struct UnitSimplex {
    Eigen::Index dim;
  };
  /// {z : <normal, z> >= offset}
  struct Halfspace {
    VectorType normal;
    Scalar offset;
  };
  /// {z : <normal, z> = offset}
  struct Hyperplane {
    VectorType normal;
    Scalar offset;
  };
  /// {z : <gradient, z - anchor> + value = 0}, the linearization of G(z) = 0 at anchor.
  struct AffineLinearization {
    VectorType gradient;
    Scalar value;
    VectorType anchor;
  };
  struct Intersection {
    std::vector<ConstraintSet> members;
  };
  /// Cartesian product; block i acts on the next blocks[i].dim() coordinates.
  struct Product {
    std::vector<ConstraintSet> blocks;
  };

  using Variant = std::variant<Whole, NonNegativeOrthant, Box, UnitSimplex, Halfspace, Hyperplane,
                               AffineLinearization, Intersection, Product>;

  static ConstraintSet whole(Eigen::Index dim) {
    require(dim >= 1, "whole space needs dim >= 1");
    return ConstraintSet(Whole{dim});
  }

  static ConstraintSet non_negative_orthant(Eigen::Index dim) {
    require(dim >= 1, "orthant needs dim >= 1");
    return ConstraintSet(NonNegativeOrthant{dim});
  }

  static ConstraintSet box(VectorType lower, VectorType upper) {
    require(lower.size() >= 1 && lower.size() == upper.size(), "box bounds must have equal nonzero length");
    require((lower.array() <= upper.array()).all(), "box requires lower <= upper");
    return ConstraintSet(Box{std::move(lower), std::move(upper)});
  }

  static ConstraintSet unit_simplex(Eigen::Index dim) {
    require(dim >= 1, "simplex needs dim >= 1");
    return ConstraintSet(UnitSimplex{dim});
  }

  static ConstraintSet halfspace(VectorType normal, Scalar offset) {
    require(normal.size() >= 1 && normal.squaredNorm() > 0, "halfspace normal must be nonzero");
    return ConstraintSet(Halfspace{std::move(normal), offset});
  }

  static ConstraintSet hyperplane(VectorType normal, Scalar offset) {
    require(normal.size() >= 1 && normal.squaredNorm() > 0, "hyperplane normal must be nonzero");
    return ConstraintSet(Hyperplane{std::move(normal), offset});
  }

  static ConstraintSet affine_linearization(VectorType gradient, Scalar value, VectorType anchor) {
    require(gradient.size() == anchor.size(), "linearization gradient and anchor differ in length");
    require(gradient.squaredNorm() > 0, "degenerate linearization: zero gradient");
    return ConstraintSet(AffineLinearization{std::move(gradient), value, std::move(anchor)});
  }

  static ConstraintSet intersection(std::vector<ConstraintSet> members) {
    require(!members.empty(), "intersection needs at least one member");
    for (const auto& m : members) {
      require(m.dim() == members.front().dim(), "intersection members differ in dimension");
    }
    return ConstraintSet(Intersection{std::move(members)});
  }

  static ConstraintSet product(std::vector<ConstraintSet> blocks) {
    require(!blocks.empty(), "product needs at least one block");
    return ConstraintSet(Product{std::move(blocks)});
  }

  const Variant& variant() const { return v_; }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Whole> || std::is_same_v<T, NonNegativeOrthant> ||
                        std::is_same_v<T, UnitSimplex>) {
            return s.dim;
          } else if constexpr (std::is_same_v<T, Box>) {
            return s.lower.size();
          } else if constexpr (std::is_same_v<T, Halfspace> || std::is_same_v<T, Hyperplane>) {
            return s.normal.size();
          } else if constexpr (std::is_same_v<T, AffineLinearization>) {
            return s.gradient.size();
          } else if constexpr (std::is_same_v<T, Intersection>) {
            return s.members.front().dim();
          } else {
            Eigen::Index n = 0;
            for (const auto& b : s.blocks) n += b.dim();
            return n;
          }
        },
        v_);
  }

  /// True when projection is a closed-form operation (no Dykstra loop).
  bool is_exact() const {
    if (const auto* p = std::get_if<Product>(&v_)) {
      return std::all_of(p->blocks.begin(), p->blocks.end(), [](const auto& b) { return b.is_exact(); });
    }
    return !std::holds_alternative<Intersection>(v_);
  }

 private:
  explicit ConstraintSet(Variant v) : v_(std::move(v)) {}

  static void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  }

  Variant v_;
};

using ConstraintSetd = ConstraintSet<double>;

/// Sort-and-threshold projection onto {x >= 0, sum(x) = 1}.
template <typename Derived>
Vector<typename Derived::Scalar> project_simplex(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("project_simplex: empty vector");

  std::vector<Scalar> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[i] = y(i);
  std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());

  // Largest j with sorted[j] - (prefix_j - 1)/(j+1) > 0; j = 0 always qualifies.
  Scalar prefix = 0;
  Scalar tau = sorted[0] - Scalar(1);
  for (Eigen::Index j = 0; j < n; ++j) {
    prefix += sorted[j];
    const Scalar candidate = (prefix - Scalar(1)) / Scalar(j + 1);
    if (sorted[j] - candidate > Scalar(0)) tau = candidate;
  }
  return (y.array() - tau).max(Scalar(0)).matrix();
}

/// Projection onto the linearized constraint {z : <g, z - anchor> + value = 0}.
template <typename DerivedG, typename DerivedA, typename DerivedY>
Vector<typename DerivedY::Scalar> project_affine_linearization(const Eigen::MatrixBase<DerivedG>& g,
                                                               typename DerivedY::Scalar value,
                                                               const Eigen::MatrixBase<DerivedA>& anchor,
                                                               const Eigen::MatrixBase<DerivedY>& y) {
  const auto gg = g.squaredNorm();
  if (!(gg > 0)) throw std::invalid_argument("project_affine_linearization: zero gradient");
  if (g.size() != y.size() || anchor.size() != y.size()) {
    throw std::invalid_argument("project_affine_linearization: dimension mismatch");
  }
  const auto violation = g.dot(y - anchor) + value;
  return y - (violation / gg) * g;
}

namespace detail {

template <typename Scalar>
Vector<Scalar> project_exact(const ConstraintSet<Scalar>& set, const Vector<Scalar>& y,
                             const ProjectionOptions& opts, int& iterations);

template <typename Scalar>
Scalar distance_to(const ConstraintSet<Scalar>& set, const Vector<Scalar>& y, const ProjectionOptions& opts) {
  int iters = 0;
  return (y - project_exact(set, y, opts, iters)).norm();
}

// Exact projection onto C ∩ {a.x >= c} (or = c) when C has an exact projection:
// the KKT point is P_C(y + lambda a), and a.P_C(y + lambda a) is nondecreasing in
// lambda, so a one-dimensional root search finds the multiplier.
template <typename Scalar>
std::optional<Vector<Scalar>> project_with_scalar_constraint(const std::vector<ConstraintSet<Scalar>>& members,
                                                             const Vector<Scalar>& y, const ProjectionOptions& opts,
                                                             int& iterations) {
  using Set = ConstraintSet<Scalar>;
  if (members.size() != 2) return std::nullopt;
  auto scalar_index = [&](std::size_t i) {
    const auto& v = members[i].variant();
    return std::holds_alternative<typename Set::Halfspace>(v) || std::holds_alternative<typename Set::Hyperplane>(v);
  };
  const std::size_t k = scalar_index(1) ? 1 : (scalar_index(0) ? 0 : 2);
  if (k == 2) return std::nullopt;
  const auto& other = members[1 - k];
  if (std::holds_alternative<typename Set::Intersection>(other.variant())) return std::nullopt;

  Vector<Scalar> a;
  Scalar c;
  bool equality;
  if (const auto* h = std::get_if<typename Set::Halfspace>(&members[k].variant())) {
    a = h->normal, c = h->offset, equality = false;
  } else {
    const auto& hp = std::get<typename Set::Hyperplane>(members[k].variant());
    a = hp.normal, c = hp.offset, equality = true;
  }

  int inner = 0;
  auto point_at = [&](Scalar lam) { return project_exact(other, Vector<Scalar>(y + lam * a), opts, inner); };
  Vector<Scalar> x = point_at(Scalar(0));
  Scalar g0 = a.dot(x) - c;
  iterations = 1;
  if (g0 == 0 || (!equality && g0 > 0)) return x;

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar a_norm = a.norm();
  auto small = [&](Scalar g, const Vector<Scalar>& z) {
    return std::abs(g) <= 64 * eps * (std::abs(c) + a_norm * z.norm()) + Scalar(opts.tol) * a_norm * Scalar(1e-3);
  };
  if (small(g0, x)) return x;

  // Bracket the root; the multiplier has the opposite sign of g(0).
  const Scalar dir = g0 < 0 ? Scalar(1) : Scalar(-1);
  Scalar step = std::abs(g0) / a.squaredNorm();
  Scalar lo = 0, glo = g0, hi = 0, ghi = g0;
  Vector<Scalar> x_hi;
  bool bracketed = false;
  for (int i = 0; i < 2000 && !bracketed; ++i, step *= 2) {
    const Scalar lam = dir * step;
    x_hi = point_at(lam);
    const Scalar g = a.dot(x_hi) - c;
    ++iterations;
    if ((g > 0) == (g0 < 0) || small(g, x_hi)) {
      hi = lam, ghi = g, bracketed = true;
    } else {
      lo = lam, glo = g;
    }
    if (!std::isfinite(step)) break;
  }
  if (!bracketed) throw ProjectionError("projection: intersection with the constraint hyperplane appears empty");
  if (small(ghi, x_hi)) return x_hi;

  // Illinois regula falsi; exact on the final linear piece of the piecewise-smooth g.
  Vector<Scalar> best = x_hi;
  Scalar best_g = ghi;
  int side = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Scalar m = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(m > std::min(lo, hi) && m < std::max(lo, hi))) m = (lo + hi) / 2;
    const Vector<Scalar> xm = point_at(m);
    const Scalar gm = a.dot(xm) - c;
    ++iterations;
    if (std::abs(gm) < std::abs(best_g)) best = xm, best_g = gm;
    if (small(gm, xm)) return xm;
    if ((gm < 0) == (glo < 0)) {
      lo = m, glo = gm;
      if (side == -1) ghi /= 2;
      side = -1;
    } else {
      hi = m, ghi = gm;
      if (side == 1) glo /= 2;
      side = 1;
    }
    if (std::abs(hi - lo) <= 4 * eps * std::max(std::abs(lo), std::abs(hi))) return best;
  }
  return best;
}

template <typename Scalar>
Vector<Scalar> dykstra(const std::vector<ConstraintSet<Scalar>>& members, const Vector<Scalar>& y,
                       const ProjectionOptions& opts, int& iterations, Scalar& residual) {
  if (members.size() == 1) {
    return project_exact(members.front(), y, opts, iterations);
  }
  if (auto exact = project_with_scalar_constraint(members, y, opts, iterations)) {
    residual = 0;
    return *exact;
  }
  Vector<Scalar> x = y;
  std::vector<Vector<Scalar>> increments(members.size(), Vector<Scalar>::Zero(y.size()));
  Vector<Scalar> z(y.size());
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector<Scalar> previous = x;
    // x can sit still for a sweep while the increments are still moving, so both must settle.
    Scalar change = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      z = x + increments[i];
      int inner = 0;
      x = project_exact(members[i], z, opts, inner);
      const Vector<Scalar> next = z - x;
      change = std::max(change, (next - increments[i]).norm());
      increments[i] = next;
    }
    change = std::max(change, (x - previous).norm());
    if (change <= opts.tol) {
      residual = 0;
      for (const auto& m : members) residual = std::max(residual, distance_to(m, x, opts));
      if (residual <= opts.tol) {
        iterations = it;
        return x;
      }
    }
  }
  throw ProjectionError("Dykstra projection did not converge in " + std::to_string(opts.max_iter) +
                        " iterations (intersection may be empty)");
}

template <typename Scalar>
Vector<Scalar> project_exact(const ConstraintSet<Scalar>& set, const Vector<Scalar>& y,
                             const ProjectionOptions& opts, int& iterations) {
  using Set = ConstraintSet<Scalar>;
  iterations = 0;
  return std::visit(
      [&](const auto& s) -> Vector<Scalar> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, typename Set::Whole>) {
          return y;
        } else if constexpr (std::is_same_v<T, typename Set::NonNegativeOrthant>) {
          return y.cwiseMax(Scalar(0));
        } else if constexpr (std::is_same_v<T, typename Set::Box>) {
          return y.cwiseMax(s.lower).cwiseMin(s.upper);
        } else if constexpr (std::is_same_v<T, typename Set::UnitSimplex>) {
          return project_simplex(y);
        } else if constexpr (std::is_same_v<T, typename Set::Halfspace>) {
          const Scalar slack = s.normal.dot(y) - s.offset;
          if (slack >= 0) return y;
          return y - (slack / s.normal.squaredNorm()) * s.normal;
        } else if constexpr (std::is_same_v<T, typename Set::Hyperplane>) {
          const Scalar slack = s.normal.dot(y) - s.offset;
          return y - (slack / s.normal.squaredNorm()) * s.normal;
        } else if constexpr (std::is_same_v<T, typename Set::AffineLinearization>) {
          return project_affine_linearization(s.gradient, s.value, s.anchor, y);
        } else if constexpr (std::is_same_v<T, typename Set::Intersection>) {
          Scalar residual = 0;
          return dykstra(s.members, y, opts, iterations, residual);
        } else {
          Vector<Scalar> out(y.size());
          Eigen::Index offset = 0;
          for (const auto& block : s.blocks) {
            const Eigen::Index n = block.dim();
            int inner = 0;
            out.segment(offset, n) = project_exact(block, Vector<Scalar>(y.segment(offset, n)), opts, inner);
            iterations = std::max(iterations, inner);
            offset += n;
          }
          return out;
        }
      },
      set.variant());
}

template <typename Scalar>
Scalar residual_of(const ConstraintSet<Scalar>& set, const Vector<Scalar>& x, const ProjectionOptions& opts) {
  using Set = ConstraintSet<Scalar>;
  if (const auto* inter = std::get_if<typename Set::Intersection>(&set.variant())) {
    Scalar r = 0;
    for (const auto& m : inter->members) r = std::max(r, distance_to(m, x, opts));
    return r;
  }
  if (const auto* prod = std::get_if<typename Set::Product>(&set.variant())) {
    Scalar r = 0;
    Eigen::Index offset = 0;
    for (const auto& block : prod->blocks) {
      const Eigen::Index n = block.dim();
      r = std::max(r, residual_of(block, Vector<Scalar>(x.segment(offset, n)), opts));
      offset += n;
    }
    return r;
  }
  return 0;
}

}  // namespace detail

/// Euclidean projection of y onto `set`.
///
/// Closed form for the elementary sets; Dykstra's algorithm for intersections,
/// stopping once both the per-sweep change and the largest member distance are
/// at most opts.tol. Throws std::invalid_argument on a dimension mismatch and
/// ProjectionError when Dykstra exhausts opts.max_iter.
template <typename Scalar, typename Derived>
ProjectionResult<Scalar> project(const ConstraintSet<Scalar>& set, const Eigen::MatrixBase<Derived>& y,
                                 const ProjectionOptions& opts = {}) {
  if (y.size() != set.dim()) throw std::invalid_argument("project: dimension mismatch");
  if (!(opts.tol > 0)) throw std::invalid_argument("project: tol must be positive");
  ProjectionResult<Scalar> result;
  result.point = detail::project_exact(set, Vector<Scalar>(y), opts, result.iterations);
  result.residual = set.is_exact() ? Scalar(0) : detail::residual_of(set, result.point, opts);
  return result;
}

/// Distance-style feasibility violation of x with respect to `set`.
template <typename Scalar, typename Derived>
Scalar feasibility_violation(const ConstraintSet<Scalar>& set, const Eigen::MatrixBase<Derived>& x,
                             const ProjectionOptions& opts = {}) {
  if (x.size() != set.dim()) throw std::invalid_argument("feasibility_violation: dimension mismatch");
  const Vector<Scalar> xv = x;
  if (set.is_exact()) return detail::distance_to(set, xv, opts);
  return detail::residual_of(set, xv, opts);
}

}  // namespace adasample
