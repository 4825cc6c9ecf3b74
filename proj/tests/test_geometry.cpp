#include "rectify/geometry.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace rect;

namespace {

Point P(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Line x_axis(int d = 2) { return Line(Point::Zero(d), Point::Unit(d, 0)); }

MPlane axis_plane(int d, int axis) { return MPlane(Point::Zero(d), Eigen::MatrixXd(Point::Unit(d, axis))); }

}  // namespace

TEST(DistPointLine, Examples) {
  EXPECT_DOUBLE_EQ(dist_point_line(P({0, 1}), x_axis()), 1.0);
  EXPECT_DOUBLE_EQ(dist_point_line(P({3, 4}), x_axis()), 4.0);
  EXPECT_DOUBLE_EQ(dist_point_line(P({-2.5, 0}), x_axis()), 0.0);
}

TEST(DistPointLine, DimensionMismatchThrows) {
  EXPECT_THROW(dist_point_line(P({0, 1, 2}), x_axis()), DimensionError);
}

TEST(DistPointLine, RigidMotionInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 5;
    const Eigen::MatrixXd R = oracle::random_rotation(d, rng);
    const Point shift = oracle::random_points(d, 1, rng).col(0);
    const Point p = oracle::random_points(d, 1, rng).col(0);
    const Line l(oracle::random_points(d, 1, rng).col(0), oracle::random_points(d, 1, rng).col(0));
    const Line moved(R * l.anchor + shift, R * l.direction);
    EXPECT_NEAR(dist_point_line(p, l), dist_point_line(R * p + shift, moved), 1e-9);
  }
}

TEST(Line, ZeroDirectionThrows) { EXPECT_THROW(Line(P({0, 0}), P({0, 0})), std::invalid_argument); }

TEST(Line, DirectionIsNormalized) {
  const Line l(P({1, 1}), P({3, 4}));
  EXPECT_NEAR(l.direction.norm(), 1.0, 1e-12);
}

TEST(MPlane, BasisIsOrthonormal) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd span = oracle::random_points(6, 3, rng);
  const MPlane V(Point::Zero(6), span);
  const Eigen::MatrixXd G = V.basis.transpose() * V.basis;
  EXPECT_LE((G - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MPlane, RankDeficientThrows) {
  Eigen::MatrixXd span(3, 2);
  span << 1, 2, 0, 0, 0, 0;
  EXPECT_THROW(MPlane(Point::Zero(3), span), std::invalid_argument);
}

TEST(DistPointPlane, Examples) {
  EXPECT_DOUBLE_EQ(dist_point_plane(P({1, 1}), axis_plane(2, 0), P({0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(dist_point_plane(P({0, 3, 4}), axis_plane(3, 0), P({0, 0, 0})), 5.0);
  // p in x + V
  EXPECT_NEAR(dist_point_plane(P({5, 1}), axis_plane(2, 0), P({2, 1})), 0.0, 1e-15);
}

TEST(DistPointPlane, MatchesLeastSquares) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 3 + trial % 6;
    const int m = 1 + trial % (d - 1);
    const Eigen::MatrixXd span = oracle::random_points(d, m, rng);
    const MPlane V(oracle::random_points(d, 1, rng).col(0), span);
    const Point p = oracle::random_points(d, 1, rng).col(0);
    const Point x = oracle::random_points(d, 1, rng).col(0);
    EXPECT_NEAR(dist_point_plane(p, V, x), oracle::dist_to_span(p - x, span), 1e-10);
  }
}

TEST(OrderByProjection, Examples) {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 2, 1, 0, 0, 0;
  EXPECT_EQ(order_by_projection(pts, x_axis()), (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_EQ(order_by_projection(Eigen::MatrixXd::Zero(2, 1), x_axis()), (std::vector<std::size_t>{0}));
}

TEST(OrderByProjection, TiesKeepInputOrder) {
  Eigen::MatrixXd pts(2, 4);
  pts << 1, 0, 1, 0, 0, 5, 3, -1;
  EXPECT_EQ(order_by_projection(pts, x_axis()), (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(OrderByProjection, MirrorReverses) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd pts = oracle::random_points(3, 40, rng);
    const Line l(oracle::random_points(3, 1, rng).col(0), oracle::random_points(3, 1, rng).col(0));
    // Reflect along l: p -> p - 2 <p - a, u> u.
    Eigen::MatrixXd mirror = pts;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      const double t = (pts.col(j) - l.anchor).dot(l.direction);
      mirror.col(j) -= 2.0 * t * l.direction;
    }
    auto a = order_by_projection(pts, l);
    const auto b = order_by_projection(mirror, l);
    std::reverse(a.begin(), a.end());
    EXPECT_EQ(a, b);
  }
}

TEST(OrderByProjection, NearbyLinesAgreeUpToReversal) {
  // 1-separated points within 2 eps of two lines, eps < 1/32.
  const double eps = 1.0 / 40.0;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> jitter(-eps, eps);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20;
    std::vector<int> slot(n);
    std::iota(slot.begin(), slot.end(), 0);
    std::shuffle(slot.begin(), slot.end(), rng);
    Eigen::MatrixXd pts(2, n);
    for (int i = 0; i < n; ++i) {
      pts(0, i) = 1.2 * slot[i];
      pts(1, i) = jitter(rng);
    }
    const double slope = eps / (2.4 * n);
    const Line l1 = x_axis();
    const Line l2(P({0, eps / 2}), trial % 2 ? P({1, slope}) : P({-1, -slope}));
    // Brute-force projections.
    std::vector<std::pair<double, std::size_t>> s1, s2;
    for (int i = 0; i < n; ++i) {
      ASSERT_LE(dist_point_line(pts.col(i), l2), 2 * eps);
      s1.push_back({pts(0, i), i});
      s2.push_back({(pts.col(i) - l2.anchor).dot(l2.direction), i});
    }
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    const auto o1 = order_by_projection(pts, l1);
    auto o2 = order_by_projection(pts, l2);
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(o1[i], s1[i].second);
      EXPECT_EQ(o2[i], s2[i].second);
    }
    if (o1 != o2) std::reverse(o2.begin(), o2.end());
    EXPECT_EQ(o1, o2);
  }
}

TEST(Hausdorff, Examples) {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 2);
  A << 0;
  B << 3;
  C << 0, 10;
  EXPECT_DOUBLE_EQ(hausdorff_distance(A, A), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff_distance(A, B), 3.0);
  EXPECT_DOUBLE_EQ(hausdorff_distance(C, A), 10.0);
  EXPECT_DOUBLE_EQ(excess(A, C), 0.0);
  EXPECT_DOUBLE_EQ(excess(C, A), 10.0);
}

TEST(Hausdorff, EmptyThrows) {
  EXPECT_THROW(hausdorff_distance(Eigen::MatrixXd(2, 0), Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
}

TEST(Hausdorff, MatchesBruteForceAndTriangleInequality) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 4;
    const auto A = oracle::random_points(d, 1 + trial % 13, rng);
    const auto B = oracle::random_points(d, 1 + trial % 7, rng);
    const auto C = oracle::random_points(d, 2 + trial % 5, rng);
    const double ab = hausdorff_distance(A, B), bc = hausdorff_distance(B, C), ac = hausdorff_distance(A, C);
    EXPECT_NEAR(ab, oracle::hausdorff(A, B), 1e-12);
    EXPECT_NEAR(ab, hausdorff_distance(B, A), 1e-15);
    EXPECT_LE(ac, ab + bc + 1e-12);
  }
}

TEST(Segments, PointSegmentMatchesSampling) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = oracle::random_points(3, 3, rng);
    const double sampled = oracle::point_segment(q.col(0), q.col(1), q.col(2));
    const double exact = dist_point_segment(q.col(0), q.col(1), q.col(2));
    EXPECT_LE(exact, sampled + 1e-12);
    EXPECT_NEAR(exact, sampled, 2e-4);
  }
  EXPECT_DOUBLE_EQ(dist_point_segment(P({1, 1}), P({0, 0}), P({0, 0})), std::sqrt(2.0));
}

TEST(Segments, SegmentSegment) {
  EXPECT_NEAR(dist_segment_segment(P({0, 0}), P({2, 0}), P({1, -1}), P({1, 1})), 0.0, 1e-15);
  EXPECT_NEAR(dist_segment_segment(P({0, 0}), P({1, 0}), P({2, 1}), P({3, 1})), std::sqrt(2.0), 1e-15);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = oracle::random_points(3, 4, rng);
    double sampled = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= 400; ++s) {
      const double t = s / 400.0;
      sampled = std::min(sampled, oracle::point_segment((1 - t) * q.col(0) + t * q.col(1), q.col(2), q.col(3), 401));
    }
    const double exact = dist_segment_segment(q.col(0), q.col(1), q.col(2), q.col(3));
    EXPECT_LE(exact, sampled + 1e-12);
    EXPECT_NEAR(exact, sampled, 2e-2);
  }
}

TEST(Diameter, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  const auto pts = oracle::random_points(4, 60, rng);
  double best = 0.0;
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) best = std::max(best, oracle::dist(pts.col(i), pts.col(j)));
  EXPECT_NEAR(diameter(pts), best, 1e-14);
}

TEST(CanonicalizeSign, FirstNonzeroPositive) {
  Point v = P({0, -2, 3});
  canonicalize_sign(v);
  EXPECT_EQ(v, P({0, 2, -3}));
  Point w = P({1e-14, 1, 0});
  canonicalize_sign(w);
  EXPECT_GT(w[1], 0);
}

TEST(LexLess, Order) {
  EXPECT_TRUE(lex_less(P({0, 5}), P({1, 0})));
  EXPECT_TRUE(lex_less(P({1, 0}), P({1, 2})));
  EXPECT_FALSE(lex_less(P({1, 2}), P({1, 2})));
}

TEST(Embedding, IsometricAndOrderPreserving) {
  std::mt19937_64 rng(31);
  for (int d : {2, 3, 10, 50}) {
    const Eigen::MatrixXd M = order_preserving_embedding(d, 99 + d);
    ASSERT_EQ(M.rows(), d);
    ASSERT_EQ(M.cols(), 2);
    EXPECT_LE((M.transpose() * M - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    const auto pts = oracle::random_points(2, 50, rng);
    const Eigen::MatrixXd up = M * pts;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        EXPECT_NEAR(oracle::dist(up.col(i), up.col(j)), oracle::dist(pts.col(i), pts.col(j)), 1e-12);
        EXPECT_EQ(lex_less(up.col(i), up.col(j)), lex_less(pts.col(i), pts.col(j)));
      }
  }
  EXPECT_THROW(order_preserving_embedding(1, 0), std::invalid_argument);
  EXPECT_EQ(order_preserving_embedding(7, 5), order_preserving_embedding(7, 5));
}
