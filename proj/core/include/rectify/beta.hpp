#pragma once

#include "rectify/measures.hpp"

#include <cstddef>
#include <vector>

namespace rect {

struct BetaResult {
  double value = 0.0;
  bool has_line = false;  // false when the window carries no mass / no points
  Line line;
  double window_diam = 0.0;
  double window_mass = 0.0;
};

// Weighted least-squares line: through the weighted centroid, along the top
// eigenvector of the weighted covariance. A repeated top eigenvalue resolves to
// the lexicographically largest unit vector of the eigenspace; directions are
// sign-canonical (first nonzero entry positive).
Line fit_line(const PointSet& points, const std::vector<std::size_t>& idx,
              const Eigen::VectorXd* weights = nullptr);

Line best_fit_line(const DiscreteMeasure& mu, const Ball& window);
Point center_of_mass(const DiscreteMeasure& mu, const Ball& window);

// beta_2 over E = dilation * window, diam E = 2 * dilation * radius.
BetaResult beta2(const DiscreteMeasure& mu, const Ball& window, double dilation = 1.0);
// Same normalisation, evaluated at a fixed line instead of the minimiser.
double beta2_line(const DiscreteMeasure& mu, const Ball& window, double dilation, const Line& l);
// Core of beta2 for a precomputed atom list of E.
BetaResult beta2_atoms(const DiscreteMeasure& mu, const std::vector<std::size_t>& idx, double diamE);

// Sup-distance to the unweighted least-squares line of the points in the
// window, over diam Q. An upper bound for the minimax beta.
BetaResult beta_sup(const PointSet& points, const Ball& window);
// Minimax beta for planar points: half the minimal strip width over diam Q,
// attained perpendicular to a convex-hull edge.
BetaResult beta_sup_exact_2d(const PointSet& points, const Ball& window);

}  // namespace rect
