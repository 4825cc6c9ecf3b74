#pragma once

#include "rectify/measures.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rect {

// Farthest-point traversal (Gonzalez order). The first point is the
// lexicographically smallest one; each later point is
// the one farthest from those already chosen, ties (equal on the kGeomTol grid) going to
// the lowest index. radii[i] is the distance of order[i] to order[0..i-1]
// (+inf for the first pick). Stops once no point is at distance >= stop_radius.
struct GreedyTraversal {
  std::vector<std::size_t> order;
  std::vector<double> radii;
};
GreedyTraversal farthest_point_traversal(const PointSet& points, double stop_radius);

// Indices of a delta-separated, delta-maximal subset, in traversal order.
std::vector<std::size_t> maximal_net(const PointSet& points, double delta);

// Number of traversal entries whose insertion radius clears delta.
std::size_t net_prefix(const GreedyTraversal& tr, double delta);

struct NetLevel {
  int k = 0;
  double separation = 0.0;           // 2^-k
  std::vector<std::size_t> indices;  // atom indices; ball j is centred at indices[j]
};

struct MultiresolutionFamily {
  int k0 = 0;
  int k_max = 0;
  double lambda2 = 1.1;
  int J = 10;
  std::vector<NetLevel> levels;  // levels[k - k0]

  const NetLevel& level(int k) const { return levels.at(static_cast<std::size_t>(k - k0)); }
  double radius(int k) const;  // lambda2 * 2^-k
  std::size_t count(int k) const { return level(k).indices.size(); }
  Point center(const DiscreteMeasure& mu, int k, std::size_t j) const;
  Ball ball(const DiscreteMeasure& mu, int k, std::size_t j) const;
};

inline constexpr int kDefaultJ = 10;
inline constexpr double kDefaultLambda2 = 1.1;

double min_lambda2(int J);  // (1 - 2^-J)^-2
MultiresolutionFamily build_family(const DiscreteMeasure& mu, int k0, int k_max,
                                   double lambda2 = kDefaultLambda2, int J = kDefaultJ);

struct NetViolation {
  int k = 0;
  std::string kind;  // separation, maximality, nestedness
  std::size_t a = 0, b = 0;
  double value = 0.0;
};
std::vector<NetViolation> check_family(const MultiresolutionFamily& fam, const DiscreteMeasure& mu);

// max over B in C_k of #{B' in C_j : some atom lies in both closed balls}.
std::size_t overlap_counts(const MultiresolutionFamily& fam, const DiscreteMeasure& mu, int k, int j);
// Full table for k0 <= k <= j <= k_max, indexed [k - k0][j - k0].
std::vector<std::vector<std::size_t>> overlap_table(const MultiresolutionFamily& fam,
                                                    const DiscreteMeasure& mu);
// D^(j - k + 3 + log2 lambda2).
double overlap_bound(double D, int k, int j, double lambda2);

}  // namespace rect
