#pragma once

#include "rectify/curve.hpp"
#include "rectify/nets.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rect {

struct BallId {
  int k = 0;
  std::size_t j = 0;
  bool operator==(const BallId& o) const { return k == o.k && j == o.j; }
  bool operator<(const BallId& o) const { return k != o.k ? k < o.k : j < o.j; }
};

// Core of B_k^j: the balls cB_k^j, then every cB_{k+iJ}^{j'} meeting the
// previous stage, iterated over the available scales.
struct Core {
  BallId ball;
  int family = 0;               // (k - k0) mod J
  std::vector<BallId> members;  // sorted; members[0] is the ball itself
  double reach = 0.0;           // max over members of |center - x_B| + radius
};

struct CoreFamilies {
  double c = 0.0;
  int J = kDefaultJ;
  double lambda2 = kDefaultLambda2;
  int k0 = 0, k_max = 0;
  std::vector<std::vector<Core>> cores;  // [k - k0][j]

  const Core& core(const BallId& b) const { return cores.at(static_cast<std::size_t>(b.k - k0)).at(b.j); }
  double radius(int k) const;  // c * lambda2 * 2^-k
};

inline double default_core_constant(double lambda2) { return 1.0 / (4.0 * lambda2); }

// Throws std::invalid_argument unless c <= 1/(4 lambda2), J >= 10 and
// lambda2 > (1 - 2^-J)^-2.
CoreFamilies build_cores(const MultiresolutionFamily& fam, const DiscreteMeasure& mu, double c, int J);

// Closed-ball intersection of some constituent of each core.
bool cores_intersect(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                     const BallId& a, const BallId& b);
double core_diameter(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                     const BallId& b);
// Distance between the unions of closed balls, 0 when they meet.
double core_distance(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                     const BallId& a, const BallId& b);

struct CoreReport {
  std::size_t cores = 0;
  std::size_t diameter_violations = 0;  // core diameter outside [2, 2 + 2^(4-J)] radii
  std::size_t gap_violations = 0;       // same k, same family, gap < 2^-k-1
  double min_gap_ratio = 0.0;           // min over such pairs of gap / 2^-k-1
  std::size_t nesting_violations = 0;   // meeting cores of a family that are not nested
  std::size_t parent_conflicts = 0;     // balls with more than one candidate parent
  bool ok() const { return diameter_violations == 0 && gap_violations == 0 && nesting_violations == 0 && parent_conflicts == 0; }
};
CoreReport check_cores(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu);

struct TreeNode {
  BallId ball;
  long parent = -1;  // node index
  std::vector<std::size_t> children;
  int depth = 0;
  bool alive = false;  // lies on a branch reaching the deepest available generation
};

struct BallTree {
  std::vector<TreeNode> nodes;  // nodes[0] is Top; parents precede children
  int J = kDefaultJ;
  int bottom_depth = 0;
  std::size_t parent_conflicts = 0;        // a ball claimed as child by two tree nodes
  std::size_t containment_violations = 0;  // child ball not inside its parent ball

  const TreeNode& top() const { return nodes.front(); }
  std::vector<std::size_t> at_depth(int d) const;
};

// Children of B_k^j are the balls of level k + J whose cores meet Q_k^j.
BallTree build_tree(const CoreFamilies& cf, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                    const BallId& top);

// b(B) = beta_2(mu, 2B)^2 diam B for every node.
std::vector<double> beta_payoff(const BallTree& t, const MultiresolutionFamily& fam, const DiscreteMeasure& mu);

struct GoodBadPartition {
  std::vector<char> good;  // per node
  double N = 0.0, eps = 0.0, a = 0.0;
  double D_T = 0.0;         // max mu(B) / mu(aB)
  double mass_top = 0.0;
  double mass_E = 0.0;      // E restricted to the leaves of the tree
  double mass_E_top = 0.0;  // E over all of Top
  double mass_E_prime = 0.0;
  double good_sum = 0.0;
  double sum_bound = 0.0;   // N D_T / eps
  std::vector<std::size_t> E, E_prime;  // atom indices
  bool measure_bound_holds = true;  // mu(E') >= (1 - eps mu(Top)) mu(E)
  bool sum_bound_holds = true;      // sum over Good of b <= N D_T / eps
  bool bad_closed_downward = true;
  bool good_is_tree = true;
  std::vector<std::string> warnings;
};

// E = atoms of Top covered by the deepest generation of the tree with
// S(x) = sum_B b(B)/mu(B) chi_B(x) <= N. A ball is bad when it or an ancestor
// B' has mu(E n B') <= eps mu(E) mu(Q_B'). Leaves of Good are the atoms in its
// deepest-generation balls.
GoodBadPartition good_bad(const BallTree& t, const CoreFamilies& cf, const MultiresolutionFamily& fam,
                          const DiscreteMeasure& mu, const std::vector<double>& b, double N, double eps,
                          double a);

struct LeavesCurve {
  NetHierarchy hierarchy;
  Annotations annotations;
  CurveState state;
  LengthLedger ledger;
  CurveChecks checks;
  std::vector<HierarchyViolation> violations;
  std::vector<std::vector<std::size_t>> vertex_node;  // [t][v] -> tree node of B_{t,v}
  std::vector<std::vector<std::size_t>> hat_node;     // [t][v] -> tree node of the window ball
  std::size_t hat_fallbacks = 0;  // no ancestor contained the window; Top used
  double d_T = 1.0;               // max mu(parent) / mu(B)
  double S2 = 0.0;                // sum over the tree of beta_2(mu, 2B)^2 diam B
  double rhs = 0.0;               // diam Top + d_T^(6+J) S2
  double max_hat_ratio = 0.0;     // max diam of window ball / diam B_{t,v}
  double max_leaf_distance = 0.0; // deepest alive ball centres to Gamma
  double leaf_tolerance = 0.0;    // 2 delta^t_max r0
};

// Runs the curve construction on centres of mass of the alive tree balls,
// with C* = 5 2^J, delta = 2^-J, r0 = diam Top.
LeavesCurve leaves_curve(const BallTree& t, const MultiresolutionFamily& fam, const DiscreteMeasure& mu,
                         double eps = kDefaultEpsilon);

}  // namespace rect
