#include "rectify/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace rect {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Line::Line(Point a, Point dir) : anchor(std::move(a)), direction(std::move(dir)) {
  require_same_dim(anchor.size(), direction.size(), "Line");
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("Line: zero direction");
  direction /= n;
}

MPlane::MPlane(Point base, const Eigen::MatrixXd& spanning) : basepoint(std::move(base)) {
  require_same_dim(basepoint.size(), spanning.rows(), "MPlane");
  // Modified Gram-Schmidt; the first column keeps its direction.
  basis.resize(spanning.rows(), spanning.cols());
  for (Eigen::Index j = 0; j < spanning.cols(); ++j) {
    Eigen::VectorXd v = spanning.col(j);
    for (Eigen::Index i = 0; i < j; ++i) v -= basis.col(i).dot(v) * basis.col(i);
    const double n = v.norm();
    if (n < 1e-12) throw std::invalid_argument("MPlane: rank deficient basis");
    basis.col(j) = v / n;
  }
}

void canonicalize_sign(Eigen::VectorXd& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

bool lex_less(const PointRef& a, const PointRef& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

double dist_point_line(const PointRef& p, const Line& l) {
  require_same_dim(p.size(), l.dim(), "dist_point_line");
  Eigen::VectorXd w = p - l.anchor;
  w -= w.dot(l.direction) * l.direction;
  return w.norm();
}

Point project_onto_plane_span(const PointRef& w, const MPlane& V) {
  return V.basis * (V.basis.transpose() * w);
}

double dist_point_plane(const PointRef& p, const MPlane& V, const PointRef& x) {
  require_same_dim(p.size(), V.dim(), "dist_point_plane");
  require_same_dim(x.size(), V.dim(), "dist_point_plane");
  const Eigen::VectorXd w = p - x;
  return (w - project_onto_plane_span(w, V)).norm();
}

std::vector<std::size_t> order_by_projection(const PointSet& points,
                                             const std::vector<std::size_t>& subset,
                                             const Line& l) {
  if (!subset.empty()) require_same_dim(points.rows(), l.dim(), "order_by_projection");
  std::vector<double> t(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) t[i] = l.param(points.col(subset[i]));
  std::vector<std::size_t> perm(subset.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  std::vector<std::size_t> out(subset.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = subset[perm[i]];
  return out;
}

std::vector<std::size_t> order_by_projection(const PointSet& points, const Line& l) {
  std::vector<std::size_t> all(static_cast<std::size_t>(points.cols()));
  std::iota(all.begin(), all.end(), std::size_t{0});
  return order_by_projection(points, all, l);
}

double excess(const PointSet& S, const PointSet& T) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < S.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < T.cols() && best > worst; ++j) {
      best = std::min(best, (S.col(i) - T.col(j)).squaredNorm());
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

double hausdorff_distance(const PointSet& A, const PointSet& B) {
  if (A.cols() == 0 || B.cols() == 0) throw std::invalid_argument("hausdorff_distance: empty set");
  require_same_dim(A.rows(), B.rows(), "hausdorff_distance");
  return std::max(excess(A, B), excess(B, A));
}

double dist_point_segment(const PointRef& p, const PointRef& a, const PointRef& b) {
  const Eigen::VectorXd ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - a - t * ab).norm();
}

double dist_segment_segment(const PointRef& a0, const PointRef& a1, const PointRef& b0,
                            const PointRef& b1) {
  // Closest points of two segments, clamping the unconstrained solution.
  const Eigen::VectorXd d1 = a1 - a0, d2 = b1 - b0, r = a0 - b0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-300 && e <= 1e-300) return r.norm();
  if (a <= 1e-300) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-300) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-300 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (a0 + s * d1 - b0 - t * d2).norm();
}

double diameter(const PointSet& points) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    for (Eigen::Index j = i + 1; j < points.cols(); ++j)
      best = std::max(best, (points.col(i) - points.col(j)).squaredNorm());
  return std::sqrt(best);
}

Eigen::MatrixXd order_preserving_embedding(int d, unsigned long long seed) {
  if (d < 2) throw std::invalid_argument("order_preserving_embedding: d must be >= 2");
  // In the plane w(0) = 0 and w orthogonal to u leave only the identity.
  if (d == 2) return Eigen::MatrixXd::Identity(2, 2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd u(d), w(d);
  for (int i = 0; i < d; ++i) u[i] = g(rng);
  for (int i = 0; i < d; ++i) w[i] = g(rng);
  u[0] = std::abs(u[0]) + 0.5;
  u.normalize();
  w[0] = 0.0;
  // Orthogonalize against u without touching w(0): solve for a multiple of the
  // tail of u, which keeps the first entry zero.
  Eigen::VectorXd u_tail = u;
  u_tail[0] = 0.0;
  w -= (w.dot(u) / u_tail.dot(u)) * u_tail;
  if (w[1] < 0) w = -w;
  w.normalize();
  Eigen::MatrixXd E(d, 2);
  E.col(0) = u;
  E.col(1) = w;
  return E;
}

}  // namespace rect
