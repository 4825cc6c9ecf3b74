#include "rectify/beta.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rect;

namespace {

DiscreteMeasure square_corners() {
  PointSet a(2, 4);
  a << 0, 1, 0, 1, 0, 0, 1, 1;
  return DiscreteMeasure(a, Eigen::VectorXd::Ones(4));
}

DiscreteMeasure random_measure(int d, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  Eigen::VectorXd wt(n);
  for (int i = 0; i < n; ++i) wt[i] = w(rng);
  return DiscreteMeasure(oracle::random_points(d, n, rng), wt);
}

double mean_sq_dist(const DiscreteMeasure& mu, const std::vector<std::size_t>& idx, const Line& l) {
  double s = 0.0, m = 0.0;
  for (auto i : idx) {
    const Eigen::VectorXd p = mu.atoms.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd q = l.anchor + (p - l.anchor).dot(l.direction) * l.direction;
    s += mu.weights[static_cast<Eigen::Index>(i)] * (p - q).squaredNorm();
    m += mu.weights[static_cast<Eigen::Index>(i)];
  }
  return s / m;
}

std::vector<std::size_t> all(const DiscreteMeasure& mu) {
  std::vector<std::size_t> v(static_cast<std::size_t>(mu.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

const Ball kBig{Point::Zero(2), 100.0};

}  // namespace

TEST(FitLine, MatchesSvdDirection) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 5;
    const auto mu = random_measure(d, 5 + trial % 20, rng);
    const auto idx = all(mu);
    const Line l = fit_line(mu.atoms, idx, &mu.weights);
    // Weighted centroid and principal axis from the SVD of sqrt(w)(x - c).
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < mu.size(); ++i) c += mu.weights[i] * mu.atoms.col(i);
    c /= mu.weights.sum();
    Eigen::MatrixXd Y(mu.size(), d);
    for (Eigen::Index i = 0; i < mu.size(); ++i) Y.row(i) = std::sqrt(mu.weights[i]) * (mu.atoms.col(i) - c).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinV);
    const Eigen::VectorXd v = svd.matrixV().col(0);
    EXPECT_LE((l.anchor - c).norm(), 1e-12);
    EXPECT_NEAR(std::abs(l.direction.dot(v)), 1.0, 1e-9);
    // Sign canonical: first nonzero entry positive.
    Eigen::Index first = 0;
    while (std::abs(l.direction[first]) <= 1e-12) ++first;
    EXPECT_GT(l.direction[first], 0);
  }
}

TEST(FitLine, SingleAtomAndIsotropicTies) {
  PointSet one(2, 1);
  one << 3, 4;
  const Line l = fit_line(one, {0});
  EXPECT_EQ(l.direction, Point::Unit(2, 0));
  const auto sq = square_corners();
  const Line t = fit_line(sq.atoms, all(sq), &sq.weights);
  EXPECT_NEAR(t.direction[0], 1.0, 1e-12);
  EXPECT_NEAR(t.direction[1], 0.0, 1e-12);
}

TEST(BestFitLine, AxisAtoms) {
  PointSet a(2, 5);
  a << 0, 1, 2, 3, 4, 0, 0, 0, 0, 0;
  const DiscreteMeasure mu(a, Eigen::VectorXd::Ones(5));
  const Line l = best_fit_line(mu, kBig);
  EXPECT_NEAR(std::abs(l.direction[0]), 1.0, 1e-12);
  EXPECT_NEAR(l.anchor[1], 0.0, 1e-12);
  EXPECT_THROW(best_fit_line(mu, Ball{Point::Constant(2, 50.0), 1.0}), std::domain_error);
}

TEST(BestFitLine, SquareCornersAgainstAngleGrid) {
  const auto mu = square_corners();
  const Line l = best_fit_line(mu, kBig);
  EXPECT_NEAR(mean_sq_dist(mu, all(mu), l), 0.25, 1e-12);
  // Lines through the centroid at 10^4 angles.
  double best = 1e9;
  for (int a = 0; a < 10000; ++a) {
    const double th = std::numbers::pi * a / 10000;
    Point dir(2);
    dir << std::cos(th), std::sin(th);
    best = std::min(best, mean_sq_dist(mu, all(mu), Line(Point::Constant(2, 0.5), dir)));
  }
  EXPECT_NEAR(best, 0.25, 1e-12);
}

TEST(Beta2, SquareCornersClosedForm) {
  const auto mu = square_corners();
  const Ball window{Point::Constant(2, 0.5), std::sqrt(2.0) / 2};
  const auto r = beta2(mu, window, 2.0);
  EXPECT_NEAR(r.window_diam, 2 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.value, 0.5 / (2 * std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(r.value, 0.17678, 1e-5);
  const auto grid = oracle::planar_l2_grid(mu.atoms, mu.weights, 100, 101);
  EXPECT_NEAR(std::sqrt(grid.value) / r.window_diam, r.value, 1e-9);
}

TEST(Beta2, ZeroMassAndLineSupport) {
  const auto mu = square_corners();
  const auto z = beta2(mu, Ball{Point::Constant(2, 10.0), 1.0});
  EXPECT_EQ(z.value, 0.0);
  EXPECT_FALSE(z.has_line);
  PointSet a(3, 6);
  for (int i = 0; i < 6; ++i) a.col(i) = Point::Constant(3, 0.1 * i);
  const DiscreteMeasure line(a, Eigen::VectorXd::LinSpaced(6, 1, 2));
  EXPECT_NEAR(beta2(line, Ball{Point::Zero(3), 10.0}).value, 0.0, 1e-12);
  EXPECT_THROW(beta2(line, Ball{Point::Zero(3), 1.0}, 0.5), std::invalid_argument);
}

TEST(Beta2, ReportedLineAttainsValue) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mu = random_measure(2 + trial % 3, 3 + trial % 30, rng);
    const Ball w{oracle::random_points(mu.dim(), 1, rng, -0.5, 0.5).col(0), 0.4 + 0.01 * (trial % 50)};
    const auto r = beta2(mu, w, 2.0);
    if (!r.has_line) continue;
    EXPECT_NEAR(beta2_line(mu, w, 2.0, r.line), r.value, 1e-9);
  }
}

TEST(Beta2, MinimalOverRandomProbeLines) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = random_measure(2 + trial % 3, 10, rng);
    const Ball w{Point::Zero(mu.dim()), 2.0};
    const double v = beta2(mu, w).value;
    for (int probe = 0; probe < 50; ++probe) {
      const Line l(oracle::random_points(mu.dim(), 1, rng).col(0), oracle::random_points(mu.dim(), 1, rng).col(0));
      EXPECT_LE(v, beta2_line(mu, w, 1.0, l) + 1e-12);
    }
  }
}

TEST(Beta2, RigidMotionAndScaleInvariance) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 4;
    const auto mu = random_measure(d, 12, rng);
    const Ball w{Point::Zero(d), 0.9};
    const auto R = oracle::random_rotation(d, rng);
    const Point shift = oracle::random_points(d, 1, rng).col(0);
    const double s = 0.1 + trial;
    const DiscreteMeasure moved = transform(mu, s * R, shift);
    const Ball mw{shift, s * 0.9};
    EXPECT_NEAR(beta2(mu, w, 2.0).value, beta2(moved, mw, 2.0).value, 1e-9);
  }
}

TEST(Beta2, MassOnTheLineAddsNothing) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = random_measure(2, 8, rng);
    const Ball w{Point::Zero(2), 3.0};
    const auto r = beta2(mu, w);
    const double before = r.value * r.value * mu.total_mass();
    PointSet extra(2, 3);
    for (int i = 0; i < 3; ++i) extra.col(i) = r.line.anchor + (0.3 * i - 0.3) * r.line.direction;
    const auto aug = mix(mu, 1.0, DiscreteMeasure(extra, Eigen::VectorXd::Ones(3)), 1.0);
    const double on_old_line = std::pow(beta2_line(aug, w, 1.0, r.line), 2) * aug.total_mass();
    EXPECT_NEAR(on_old_line, before, 1e-12);
    const auto ra = beta2(aug, w);
    EXPECT_LE(ra.value * ra.value * aug.total_mass(), before + 1e-12);
  }
}

TEST(CenterOfMass, Examples) {
  PointSet pair(2, 2);
  pair << -1, 3, 2, 2;
  const DiscreteMeasure p(pair, Eigen::VectorXd::Ones(2));
  EXPECT_EQ(center_of_mass(p, kBig), (Point(2) << 1, 2).finished());
  PointSet one(2, 1);
  one << 7, -7;
  EXPECT_EQ(center_of_mass(DiscreteMeasure(one, Eigen::VectorXd::Ones(1)), kBig), Point(one.col(0)));
  EXPECT_EQ(center_of_mass(square_corners(), kBig), Point::Constant(2, 0.5));
  EXPECT_THROW(center_of_mass(p, Ball{Point::Constant(2, 40.0), 1.0}), std::domain_error);
}

TEST(CenterOfMass, InequalityOnRandomLines) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 4;
    const auto mu = random_measure(d, 2 + trial % 15, rng);
    const Ball w{oracle::random_points(d, 1, rng, -0.3, 0.3).col(0), 0.8};
    if (ball_mass(mu, w.center, w.radius) <= 0) continue;
    const Line l(oracle::random_points(d, 1, rng).col(0), oracle::random_points(d, 1, rng).col(0));
    const Point z = center_of_mass(mu, w);
    EXPECT_LE(dist_point_line(z, l), beta2_line(mu, w, 1.0, l) * w.diam() + 1e-9);
  }
}

TEST(BetaSup, Examples) {
  PointSet pts(2, 3);
  pts << 0, 1, 2, 0, 1, 2;
  EXPECT_EQ(beta_sup(pts, Ball{Point::Constant(2, 50.0), 1.0}).value, 0.0);
  EXPECT_NEAR(beta_sup(pts, Ball{Point::Zero(2), 5.0}).value, 0.0, 1e-12);
}

TEST(BetaSup, SurrogateBoundsExactOnTriangle) {
  PointSet tri(2, 3);
  tri << -0.5, 0.5, 0.0, 0.0, 0.0, std::sqrt(3.0) / 2;
  const Ball Q{Point::Zero(2), 1.0};
  const double surrogate = beta_sup(tri, Q).value;
  const double exact = beta_sup_exact_2d(tri, Q).value;
  EXPECT_GE(surrogate, exact - 1e-12);
  EXPECT_NEAR(exact, oracle::planar_sup_grid(tri, 10000) / Q.diam(), 1e-6);
  EXPECT_NEAR(exact, std::sqrt(3.0) / 4 / 2, 1e-12);
}

TEST(BetaSup, ExactMatchesGridOnRandomPlanarSets) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = oracle::random_points(2, 3 + trial % 10, rng);
    const Ball Q{Point::Zero(2), 2.0};
    const double exact = beta_sup_exact_2d(pts, Q).value;
    const double grid = oracle::planar_sup_grid(pts, 20000) / Q.diam();
    EXPECT_LE(exact, grid + 1e-12);
    EXPECT_NEAR(exact, grid, 1e-4);
    EXPECT_GE(beta_sup(pts, Q).value, exact - 1e-12);
  }
  EXPECT_THROW(beta_sup_exact_2d(PointSet::Zero(3, 2), Ball{Point::Zero(3), 1.0}), DimensionError);
}
