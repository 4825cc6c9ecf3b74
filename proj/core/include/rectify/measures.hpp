#pragma once

#include "rectify/geometry.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace rect {

struct DiscreteMeasure {
  PointSet atoms;           // d x n
  Eigen::VectorXd weights;  // n, all > 0

  DiscreteMeasure() = default;
  DiscreteMeasure(PointSet a, Eigen::VectorXd w);  // validates

  Eigen::Index dim() const { return atoms.rows(); }
  Eigen::Index size() const { return atoms.cols(); }
  double total_mass() const { return weights.sum(); }
  auto atom(Eigen::Index i) const { return atoms.col(i); }
};

// Closed ball; membership is inclusive up to kBallTol.
struct Ball {
  Point center;
  double radius = 0.0;

  Ball dilate(double s) const { return Ball{center, s * radius}; }
  double diam() const { return 2.0 * radius; }
  bool contains(const PointRef& p) const { return (p - center).norm() <= radius + kBallTol; }
};

double ball_mass(const DiscreteMeasure& mu, const PointRef& center, double r);
std::vector<std::size_t> atoms_in_ball(const DiscreteMeasure& mu, const PointRef& center, double r);

struct DoublingReport {
  std::size_t point_index = 0;
  std::vector<double> radii;
  std::vector<double> ratios;  // +inf when the denominator vanishes
  double sup_ratio = 0.0;
};

// Ratios mu(B(x,2r))/mu(B(x,r)) on a geometric grid r_min..r_max.
DoublingReport doubling_profile(const DiscreteMeasure& mu, std::size_t point_index, double r_min,
                                double r_max, int steps);
double min_atom_gap(const DiscreteMeasure& mu);
// Max doubling ratio over every atom and a geometric radius grid starting at
// twice the minimum atom gap.
double empirical_doubling_constant(const DiscreteMeasure& mu, double r_max, int steps = 12);

double lower_density(const DiscreteMeasure& mu, const PointRef& x, double r);

struct GenParams {
  int dim = 2;
  // segment / circle
  double length = 1.0;
  double radius = 1.0;
  // lipschitz_graph: f piecewise linear on [0, 1] through knots (t_i, f_i).
  // Empty knots means: draw `pieces` slopes from the seed, uniform in [-L, L]
  // (or alternating +/-L when zigzag is set).
  std::vector<double> knot_t, knot_f;
  double lipschitz = 1.0;
  int pieces = 6;
  bool zigzag = false;
  // cantor4
  int depth = 6;
  // plane_stack
  int planes = 8;
  std::vector<double> coefficients;  // empty: c_i = 2^-i
  double plane_gap = 1.0;
};

// kind: segment, circle, lipschitz_graph, cantor4, plane_stack.
DiscreteMeasure generate(const std::string& kind, const GenParams& params, int n,
                         std::uint64_t seed);

// Knots actually used by lipschitz_graph for the given params and seed.
void lipschitz_knots(const GenParams& params, std::uint64_t seed, std::vector<double>& t,
                     std::vector<double>& f);

// Weighted sum a*mu + b*nu over the union of atoms.
DiscreteMeasure mix(const DiscreteMeasure& mu, double a, const DiscreteMeasure& nu, double b);
DiscreteMeasure transform(const DiscreteMeasure& mu, const Eigen::MatrixXd& linear,
                          const Point& shift);

}  // namespace rect
