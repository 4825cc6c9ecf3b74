#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rect {

using Point = Eigen::VectorXd;
// Point sets are stored column-wise: one column per point.
using PointSet = Eigen::MatrixXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

// Absolute tolerance for geometric comparisons on unit-scale data.
inline constexpr double kGeomTol = 1e-9;
// Inclusive tolerance for closed-ball membership.
inline constexpr double kBallTol = 1e-12;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Line {
  Point anchor;
  Point direction;  // unit length

  Line() = default;
  Line(Point a, Point dir);  // normalizes dir; throws on zero or mismatched dir

  Eigen::Index dim() const { return anchor.size(); }
  double param(const PointRef& p) const { return (p - anchor).dot(direction); }
  Point project(const PointRef& p) const { return anchor + param(p) * direction; }
};

// m-plane through basepoint spanned by the orthonormal columns of basis.
struct MPlane {
  Point basepoint;
  Eigen::MatrixXd basis;  // d x m

  MPlane() = default;
  // Orthonormalizes the columns; throws if they are rank deficient.
  MPlane(Point base, const Eigen::MatrixXd& spanning);

  Eigen::Index dim() const { return basepoint.size(); }
  Eigen::Index m() const { return basis.cols(); }
};

// Flip v so that its first entry with |v_i| > tol is positive.
void canonicalize_sign(Eigen::VectorXd& v, double tol = 1e-12);
bool lex_less(const PointRef& a, const PointRef& b);

double dist_point_line(const PointRef& p, const Line& l);
// |w - P_V w| with w = p - x; V acts through its basis only.
double dist_point_plane(const PointRef& p, const MPlane& V, const PointRef& x);
Point project_onto_plane_span(const PointRef& w, const MPlane& V);

// Stable sort of column indices by <p - anchor, direction>.
std::vector<std::size_t> order_by_projection(const PointSet& points, const Line& l);
std::vector<std::size_t> order_by_projection(const PointSet& points,
                                             const std::vector<std::size_t>& subset,
                                             const Line& l);

double excess(const PointSet& S, const PointSet& T);
double hausdorff_distance(const PointSet& A, const PointSet& B);

double dist_point_segment(const PointRef& p, const PointRef& a, const PointRef& b);
double dist_segment_segment(const PointRef& a0, const PointRef& a1,
                            const PointRef& b0, const PointRef& b1);

double diameter(const PointSet& points);

// Random isometric embedding R^2 -> R^d as a d x 2 matrix [u w] with
// u(0) > 0, w(0) = 0, w(1) > 0, so lexicographic order of planar points
// survives the embedding.
Eigen::MatrixXd order_preserving_embedding(int d, unsigned long long seed);

}  // namespace rect
