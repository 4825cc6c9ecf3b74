#pragma once

#include "rectify/nets.hpp"
#include "rectify/spatial.hpp"

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace rect {

// Per-ball quantities entering the Jones sum, computed on demand:
// beta_2(mu, 2B), mu(B) and diam B.
class BallTermCache {
 public:
  BallTermCache(const DiscreteMeasure& mu, const MultiresolutionFamily& fam);

  struct Entry {
    double beta2 = 0.0;
    double mass = 0.0;
    double diam = 0.0;
    double term = 0.0;  // beta2^2 * diam / mass, 0 when mass is 0
  };
  const Entry& get(int k, std::size_t j);
  // Fill the listed balls, spreading the work over `threads` workers.
  void prefetch(const std::vector<std::pair<int, std::size_t>>& balls, int threads);
  // Balls of level k whose closed ball contains x.
  std::vector<std::size_t> balls_containing(int k, const PointRef& x) const;

  const DiscreteMeasure& measure() const { return mu_; }
  const MultiresolutionFamily& family() const { return fam_; }

 private:
  Entry compute(int k, std::size_t j) const;

  const DiscreteMeasure& mu_;
  const MultiresolutionFamily& fam_;
  BallIndex atoms_;
  std::vector<PointSet> centers_;
  std::vector<std::unique_ptr<BallIndex>> center_index_;
  std::vector<std::vector<std::optional<Entry>>> entries_;
};

struct JonesTerm {
  int k = 0;
  std::size_t ball = 0;
  double value = 0.0;
};

struct JonesProfile {
  Point x;
  double r = 0.0;
  int k0 = 0, k_max = 0;
  double lambda2 = 0.0;
  std::vector<double> partial_sums;  // [k - k0]: sum over scales k0..k
  std::vector<JonesTerm> terms;      // ordered by (k, ball)
  bool outside = false;              // x lies in no ball of the family

  double total() const { return partial_sums.empty() ? 0.0 : partial_sums.back(); }
};

// Truncated J_2(mu, r, x): sum over balls B with radius(B) <= r and x in B of
// beta_2(mu, 2B)^2 diam B / mu(B).
JonesProfile jones_profile(BallTermCache& cache, const PointRef& x,
                           double r = std::numeric_limits<double>::infinity());
JonesProfile jones_profile(const DiscreteMeasure& mu, const MultiresolutionFamily& fam,
                           const PointRef& x, double r = std::numeric_limits<double>::infinity());

// Sum of the terms of profile_r whose radius lies in (r', r].
double truncation_invariance_gap(const JonesProfile& profile_r, const JonesProfile& profile_rp);

enum class JonesLabel { bounded, divergent };
const char* to_string(JonesLabel l);

struct JonesClassification {
  std::vector<std::size_t> points;  // atom indices
  std::vector<JonesLabel> labels;
  std::vector<double> slopes;
  std::vector<JonesProfile> profiles;
};

inline constexpr double kDefaultSlopeThreshold = 2e-3;

// Least-squares slope of the partial sums against k over the finest half of
// the scales.
double growth_slope(const JonesProfile& p);
JonesClassification classify(const DiscreteMeasure& mu, const MultiresolutionFamily& fam,
                             const std::vector<std::size_t>& sample_points,
                             double slope_threshold = kDefaultSlopeThreshold, int threads = 1);

}  // namespace rect
