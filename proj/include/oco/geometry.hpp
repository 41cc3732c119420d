#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "oco/rng.hpp"

namespace oco {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned box {x : lower <= x <= upper}.
struct Box {
  Vec lower;
  Vec upper;
};

/// Euclidean ball {x : ||x - center|| <= radius}.
struct Ball {
  Vec center;
  double radius = 1.0;
};

/// Scaled standard simplex {x >= 0, sum_i x_i = scale} in dimension n.
struct Simplex {
  int n = 1;
  double scale = 1.0;
};

namespace detail {

/// Euclidean projection onto the scaled simplex via the sort-and-threshold
/// rule. The threshold tau is unique, so sorting ties need no tie-breaking.
inline Vec project_simplex(const Vec& p, double scale) {
  const int n = static_cast<int>(p.size());
  std::vector<double> u(p.data(), p.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double tau = 0.0;
  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    const double t = (cum - scale) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  return (p.array() - tau).max(0.0).matrix();
}

}  // namespace detail

/// One of the supported compact convex sets: box, ball, or scaled simplex.
/// These are the only families needed here; each admits an exact
/// closed-form (or sort-based) Euclidean projection.
class FeasibleSet {
 public:
  /// Default: the single point {0} in one dimension. Placeholder so
  /// aggregates holding a set stay default-constructible.
  FeasibleSet() : shape_(Box{Vec::Zero(1), Vec::Zero(1)}) {}

  explicit FeasibleSet(Box box) : shape_(std::move(box)) {
    const Box& b = std::get<Box>(shape_);
    if (b.lower.size() == 0 || b.lower.size() != b.upper.size())
      throw std::invalid_argument("box: empty or mismatched bounds");
    for (int i = 0; i < b.lower.size(); ++i)
      if (!(b.lower[i] <= b.upper[i]))
        throw std::invalid_argument("box: lower > upper at coordinate " + std::to_string(i));
  }

  explicit FeasibleSet(Ball ball) : shape_(std::move(ball)) {
    const Ball& b = std::get<Ball>(shape_);
    if (b.center.size() == 0) throw std::invalid_argument("ball: empty center");
    if (!(b.radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
  }

  explicit FeasibleSet(Simplex s) : shape_(s) {
    if (s.n < 1) throw std::invalid_argument("simplex: dimension must be positive");
    if (!(s.scale > 0.0)) throw std::invalid_argument("simplex: scale must be positive");
  }

  static FeasibleSet box(Vec lower, Vec upper) { return FeasibleSet(Box{std::move(lower), std::move(upper)}); }
  static FeasibleSet ball(Vec center, double radius) { return FeasibleSet(Ball{std::move(center), radius}); }
  static FeasibleSet simplex(int n, double scale) { return FeasibleSet(Simplex{n, scale}); }

  int dimension() const {
    if (const Box* b = std::get_if<Box>(&shape_)) return static_cast<int>(b->lower.size());
    if (const Ball* b = std::get_if<Ball>(&shape_)) return static_cast<int>(b->center.size());
    return std::get<Simplex>(shape_).n;
  }

  /// Euclidean projection: argmin over the set of ||x - point||. Idempotent;
  /// points already inside come back unchanged.
  Vec project(const Vec& point) const {
    check_dim(point);
    if (const Box* b = std::get_if<Box>(&shape_))
      return point.cwiseMax(b->lower).cwiseMin(b->upper);
    if (const Ball* b = std::get_if<Ball>(&shape_)) {
      const Vec d = point - b->center;
      const double norm = d.norm();
      if (norm <= b->radius) return point;
      return b->center + (b->radius / norm) * d;
    }
    const Simplex& s = std::get<Simplex>(shape_);
    return detail::project_simplex(point, s.scale);
  }

  /// Exact diameter: box -> ||upper - lower||, ball -> 2r, simplex -> scale*sqrt(2).
  double diameter() const {
    if (const Box* b = std::get_if<Box>(&shape_)) return (b->upper - b->lower).norm();
    if (const Ball* b = std::get_if<Ball>(&shape_)) return 2.0 * b->radius;
    return std::get<Simplex>(shape_).scale * std::sqrt(2.0);
  }

  /// True iff the point lies within Euclidean distance tol of the set.
  bool contains(const Vec& point, double tol) const {
    if (tol < 0.0) throw std::invalid_argument("contains: tol must be nonnegative");
    return (point - project(point)).norm() <= tol;
  }

  /// Canonical interior point: box midpoint, ball center, simplex barycenter.
  Vec center() const {
    if (const Box* b = std::get_if<Box>(&shape_)) return 0.5 * (b->lower + b->upper);
    if (const Ball* b = std::get_if<Ball>(&shape_)) return b->center;
    const Simplex& s = std::get<Simplex>(shape_);
    return Vec::Constant(s.n, s.scale / static_cast<double>(s.n));
  }

  /// Draw a point of the set: uniform for boxes and balls, Dirichlet(1) for
  /// the simplex.
  Vec sample(CounterRng& rng) const {
    const int n = dimension();
    if (const Box* b = std::get_if<Box>(&shape_)) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(b->lower[i], b->upper[i]);
      return x;
    }
    if (const Ball* b = std::get_if<Ball>(&shape_)) {
      Vec dir(n);
      double norm = 0.0;
      do {
        for (int i = 0; i < n; ++i) dir[i] = rng.normal();
        norm = dir.norm();
      } while (norm == 0.0);
      const double r = b->radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      return b->center + (r / norm) * dir;
    }
    const Simplex& s = std::get<Simplex>(shape_);
    Vec e(n);
    for (int i = 0; i < n; ++i) e[i] = -std::log1p(-rng.uniform());
    return (s.scale / e.sum()) * e;
  }

  const std::variant<Box, Ball, Simplex>& shape() const { return shape_; }
  bool is_box() const { return std::holds_alternative<Box>(shape_); }

 private:
  void check_dim(const Vec& point) const {
    if (static_cast<int>(point.size()) != dimension())
      throw std::invalid_argument("point dimension " + std::to_string(point.size()) +
                                  " does not match set dimension " + std::to_string(dimension()));
  }

  std::variant<Box, Ball, Simplex> shape_;
};

inline Vec project(const FeasibleSet& set, const Vec& point) { return set.project(point); }
inline double diameter(const FeasibleSet& set) { return set.diameter(); }
inline bool contains(const FeasibleSet& set, const Vec& point, double tol) { return set.contains(point, tol); }

}  // namespace oco
