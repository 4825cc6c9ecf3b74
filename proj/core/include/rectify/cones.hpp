#pragma once

#include "rectify/measures.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rect {

// Good cone: {y : dist(y - x, V) <= alpha |y - x|}; the bad cone is its
// complement, cut to B(x, r) when a radius is given.
struct ConeSpec {
  Point apex;
  MPlane plane;
  double alpha = 0.5;
  std::optional<double> radius;

  void validate() const;  // throws std::invalid_argument
};

bool in_good_cone(const ConeSpec& c, const PointRef& y);

// dist(w, V) / |w| for w != 0, 0 for w = 0. y is in the good cone iff this is <= alpha.
double cone_sine(const MPlane& V, const PointRef& w);

// mu(bad cone n B(x, r)) / mu(B(x, r)). Throws std::domain_error when the
// ball carries no mass.
double cone_mass_ratio(const DiscreteMeasure& mu, const ConeSpec& c);

// sqrt(1 - (t2 t1 + sqrt((1 - t2^2)(1 - t1^2)))), t1 = 1 - alpha, t2 = 1 - 2 alpha.
// Throws outside (0, 1); sets *out_of_domain for alpha > 1/2.
double eta_alpha(double alpha, bool* out_of_domain = nullptr);

// Exact largest eta with B(y, eta |x - y|) inside the bad cone of aperture
// alpha for every y on the boundary of the aperture alpha + (1 - alpha)/2
// cone: sin(asin(alpha') - asin(alpha)).
double eta_alpha_geometric(double alpha);

struct ContainmentReport {
  std::size_t samples = 0;
  std::size_t violations = 0;  // sampled ball points landing in the good cone
  double eta = 0.0;
  double shrink = 0.99;
  double exact_margin = 0.0;   // eta_alpha_geometric(alpha)
  bool holds() const { return violations == 0; }
};

// Draws y uniformly in radius on the boundary of the aperture
// alpha + (1 - alpha)/2 bad cone around a random m-plane of R^d, then a point
// uniformly on the sphere of radius shrink * eta |y|, and tests it against the
// aperture alpha bad cone.
ContainmentReport eta_containment_check(double alpha, int d, int m, std::size_t samples, std::uint64_t seed,
                                        double shrink = 0.99);

struct GraphExtraction {
  std::vector<std::size_t> accepted;
  std::vector<std::pair<std::size_t, std::size_t>> rejected;  // (point, first accepted conflict)
  double lipschitz = 1.0;  // max |x - y| / |P_V x - P_V y| over accepted pairs
  double bound = 1.0;      // (1 - alpha^2)^(-1/2)
  bool within_bound = true;
};

// Greedy in index order: a point is kept when |P_V (x - y)| >= sqrt(1 - alpha^2)|x - y|
// against every point already kept.
GraphExtraction graph_extract(const PointSet& points, const MPlane& V, double alpha);

// Every coordinate m-plane of R^d.
std::vector<MPlane> coordinate_plane_grid(int d, int m);
// Lines in the first two coordinates at angles pi i / count.
std::vector<MPlane> angle_line_grid(int d, int count);
// Top-m principal directions of each atom's neighbourhood of radius r,
// deduplicated.
std::vector<MPlane> local_principal_planes(const DiscreteMeasure& mu, double r, int m,
                                           double dedup_tol = 1e-6);
std::vector<double> default_alpha_grid();  // 0.1, ..., 0.9
// Geometric grid from four times the minimal atom gap to a quarter diameter.
// Throws std::domain_error when that range is empty.
std::vector<double> default_radius_grid(const DiscreteMeasure& mu, int steps = 8);

inline constexpr double kDefaultRatioThreshold = 0.05;

struct ConeLabel {
  bool positive = false;
  long plane = -1;  // witness index into the plane grid
  double alpha = 0.0;
  double min_ratio = 1.0;  // min over (V, alpha) of the max ratio over the finest radii
};

// An atom is positive when some (V, alpha) keeps the bad-cone ratio below
// the threshold at every radius in the finest half of r_grid. The witness is
// the smallest such alpha, then the lowest plane index.
std::vector<ConeLabel> classify_graph_rectifiable(const DiscreteMeasure& mu, const std::vector<MPlane>& planes,
                                                  const std::vector<double>& alphas,
                                                  const std::vector<double>& radii,
                                                  double ratio_threshold = kDefaultRatioThreshold,
                                                  int threads = 1);

}  // namespace rect
