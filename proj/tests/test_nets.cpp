#include "rectify/nets.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace rect;

namespace {

std::size_t brute_overlap(const MultiresolutionFamily& fam, const DiscreteMeasure& mu, int k, int j) {
  std::size_t best = 0;
  const double rk = fam.radius(k) + 1e-12, rj = fam.radius(j) + 1e-12;
  for (auto ck : fam.level(k).indices) {
    std::size_t count = 0;
    for (auto cj : fam.level(j).indices) {
      for (Eigen::Index a = 0; a < mu.size(); ++a) {
        if (oracle::dist(mu.atoms.col(a), mu.atoms.col(static_cast<Eigen::Index>(ck))) <= rk &&
            oracle::dist(mu.atoms.col(a), mu.atoms.col(static_cast<Eigen::Index>(cj))) <= rj) {
          ++count;
          break;
        }
      }
    }
    best = std::max(best, count);
  }
  return best;
}

void expect_net(const PointSet& pts, const std::vector<std::size_t>& net, double delta) {
  for (std::size_t a = 0; a < net.size(); ++a)
    for (std::size_t b = a + 1; b < net.size(); ++b)
      EXPECT_GE(oracle::dist(pts.col(static_cast<Eigen::Index>(net[a])), pts.col(static_cast<Eigen::Index>(net[b]))),
                delta - 1e-12);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    double best = 1e300;
    for (auto c : net) best = std::min(best, oracle::dist(pts.col(i), pts.col(static_cast<Eigen::Index>(c))));
    EXPECT_LE(best, delta + 1e-12);
  }
}

}  // namespace

TEST(MaximalNet, Examples) {
  PointSet pts(1, 3);
  pts << 0, 0.3, 1;
  EXPECT_EQ(maximal_net(pts, 0.5), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(maximal_net(PointSet::Constant(3, 1, 2.0), 0.1), (std::vector<std::size_t>{0}));
  EXPECT_THROW(maximal_net(PointSet(2, 0), 0.1), std::invalid_argument);
  EXPECT_THROW(maximal_net(pts, 0.0), std::invalid_argument);
}

TEST(MaximalNet, ExampleAmongAllMaximalNetsFromSeed) {
  // Every 0.5-separated maximal subset containing the lexicographic seed 0.
  PointSet pts(1, 3);
  pts << 0, 0.3, 1;
  std::set<std::vector<std::size_t>> maximal;
  for (unsigned mask = 1; mask < 8; ++mask) {
    if (!(mask & 1u)) continue;
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < 3; ++i)
      if (mask & (1u << i)) s.push_back(i);
    bool sep = true, cover = true;
    for (auto a : s)
      for (auto b : s)
        if (a < b && std::abs(pts(0, a) - pts(0, b)) < 0.5) sep = false;
    for (Eigen::Index i = 0; i < 3; ++i) {
      double best = 1e9;
      for (auto a : s) best = std::min(best, std::abs(pts(0, i) - pts(0, a)));
      if (best > 0.5) cover = false;
    }
    if (sep && cover) maximal.insert(s);
  }
  EXPECT_EQ(maximal.size(), 1u);
  EXPECT_EQ(*maximal.begin(), maximal_net(pts, 0.5));
}

TEST(MaximalNet, SeparatedAndCovering) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = oracle::random_points(1 + trial % 4, 120, rng);
    const double delta = 0.05 + 0.02 * (trial % 10);
    const auto net = maximal_net(pts, delta);
    expect_net(pts, net, delta);
  }
}

TEST(MaximalNet, SeedIsLexicographicMinimum) {
  std::mt19937_64 rng(7);
  const auto pts = oracle::random_points(2, 50, rng);
  const auto net = maximal_net(pts, 0.3);
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    EXPECT_FALSE(lex_less(pts.col(i), pts.col(static_cast<Eigen::Index>(net.front()))));
}

TEST(Traversal, RadiiNonincreasingAndPrefixIsNet) {
  std::mt19937_64 rng(8);
  const auto pts = oracle::random_points(3, 200, rng);
  const auto tr = farthest_point_traversal(pts, 0.0);
  ASSERT_EQ(tr.order.size(), 200u);
  EXPECT_TRUE(std::isinf(tr.radii.front()));
  for (std::size_t i = 2; i < tr.radii.size(); ++i) EXPECT_LE(tr.radii[i], tr.radii[i - 1] + 1e-9);
  for (double delta : {0.1, 0.3, 0.7}) {
    const std::size_t m = net_prefix(tr, delta);
    expect_net(pts, std::vector<std::size_t>(tr.order.begin(), tr.order.begin() + static_cast<long>(m)), delta);
  }
}

TEST(Traversal, TiesGoToLowestIndex) {
  PointSet pts(1, 4);
  pts << 0, 2, -2, 2;
  const auto tr = farthest_point_traversal(pts, 0.0);
  // Seed -2 (index 2); indices 1 and 3 tie at distance 4.
  EXPECT_EQ(tr.order, (std::vector<std::size_t>{2, 1, 0, 3}));
}

TEST(BuildFamily, SegmentLevelSizes) {
  const auto mu = generate("segment", GenParams{}, 1024, 0);
  const auto fam = build_family(mu, 0, 10);
  // The endpoints are exactly 2^0 apart.
  EXPECT_EQ(fam.count(0), 2u);
  for (int k = 0; k <= 10; ++k) {
    const auto c = fam.count(k);
    EXPECT_GE(c, std::size_t{1} << std::max(k - 1, 0));
    EXPECT_LE(c, (std::size_t{1} << k) + 1);
    if (k > 0) {
      EXPECT_LE(fam.count(k - 1), c);
    }
  }
  EXPECT_TRUE(check_family(fam, mu).empty());
}

TEST(BuildFamily, NetInvariantsOnRandomData) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const DiscreteMeasure mu(oracle::random_points(2 + trial % 2, 300, rng, 0.0, 1.0), Eigen::VectorXd::Ones(300));
    const auto fam = build_family(mu, 0, 7);
    EXPECT_TRUE(check_family(fam, mu).empty());
    for (int k = 0; k <= 7; ++k) {
      const auto& idx = fam.level(k).indices;
      expect_net(mu.atoms, idx, std::ldexp(1.0, -k));
      if (k > 0) {
        const auto& prev = fam.level(k - 1).indices;
        ASSERT_GE(idx.size(), prev.size());
        EXPECT_TRUE(std::equal(prev.begin(), prev.end(), idx.begin()));
      }
    }
  }
}

TEST(BuildFamily, Errors) {
  const auto mu = generate("segment", GenParams{}, 10, 0);
  EXPECT_THROW(build_family(mu, 3, 2), std::invalid_argument);
  EXPECT_THROW(build_family(mu, 0, 3, 1.0, 10), std::invalid_argument);
  EXPECT_THROW(build_family(mu, 0, 3, 1.5, 0), std::invalid_argument);
  EXPECT_THROW(build_family(mu, 0, 3, 4.0, 1), std::invalid_argument);
  EXPECT_NO_THROW(build_family(mu, 0, 3, 4.5, 1));
}

TEST(BuildFamily, Lambda2Bound) {
  EXPECT_DOUBLE_EQ(min_lambda2(10), 1.0 / ((1 - std::ldexp(1.0, -10)) * (1 - std::ldexp(1.0, -10))));
  EXPECT_GT(kDefaultLambda2, min_lambda2(kDefaultJ));
}

TEST(CheckFamily, DetectsBrokenNets) {
  const auto mu = generate("segment", GenParams{}, 64, 0);
  auto fam = build_family(mu, 0, 4);
  auto broken = fam;
  broken.levels[3].indices.push_back(broken.levels[3].indices[1]);  // duplicate centre
  bool sep = false;
  for (const auto& v : check_family(broken, mu)) sep = sep || v.kind == "separation";
  EXPECT_TRUE(sep);
  broken = fam;
  broken.levels[4].indices.resize(broken.levels[3].indices.size());
  bool cover = false;
  for (const auto& v : check_family(broken, mu)) cover = cover || v.kind == "maximality";
  EXPECT_TRUE(cover);
  broken = fam;
  broken.levels[2].indices.back() = broken.levels[4].indices.back();
  bool nest = false;
  for (const auto& v : check_family(broken, mu)) nest = nest || v.kind == "nestedness";
  EXPECT_TRUE(nest);
}

TEST(ChildContainment, NearbyFinerBallsLieInside) {
  const auto mu = generate("circle", GenParams{}, 2000, 0);
  const int J = 3;
  const double lambda2 = 1.35;
  ASSERT_GT(lambda2, min_lambda2(J));
  const auto fam = build_family(mu, 0, 9, lambda2, J);
  for (int k = 0; k + J <= 9; ++k) {
    double tail = 0.0;
    for (int i = 1; k + i * J <= 60; ++i) tail += std::ldexp(1.0, -k - i * J);
    for (int l = k + J; l <= 9; l += J) {
      for (std::size_t a = 0; a < fam.count(k); ++a) {
        const auto B = fam.ball(mu, k, a);
        for (std::size_t b = 0; b < fam.count(l); ++b) {
          const auto C = fam.ball(mu, l, b);
          if (oracle::dist(B.center, C.center) > tail) continue;
          EXPECT_LE(oracle::dist(B.center, C.center) + C.radius, B.radius + 1e-12);
        }
      }
    }
  }
}

TEST(Overlap, MatchesBruteForce) {
  std::mt19937_64 rng(10);
  const DiscreteMeasure mu(oracle::random_points(2, 120, rng, 0.0, 1.0), Eigen::VectorXd::Ones(120));
  const auto fam = build_family(mu, 0, 5);
  const auto table = overlap_table(fam, mu);
  for (int k = 0; k <= 5; ++k)
    for (int j = k; j <= 5; ++j) {
      const auto c = overlap_counts(fam, mu, k, j);
      EXPECT_EQ(c, brute_overlap(fam, mu, k, j)) << k << " " << j;
      EXPECT_EQ(table[k][j], c);
    }
  EXPECT_THROW(overlap_counts(fam, mu, 3, 2), std::invalid_argument);
}

TEST(Overlap, SingleAtomAndFarClusters) {
  const DiscreteMeasure one(PointSet::Zero(2, 1), Eigen::VectorXd::Ones(1));
  const auto f1 = build_family(one, 0, 4);
  for (int k = 0; k <= 4; ++k)
    for (int j = k; j <= 4; ++j) EXPECT_EQ(overlap_counts(f1, one, k, j), 1u);
  PointSet two(2, 2);
  two << 0, 100, 0, 0;
  const DiscreteMeasure mu(two, Eigen::VectorXd::Ones(2));
  const auto f2 = build_family(mu, 0, 3);
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(overlap_counts(f2, mu, k, k), 1u);
}

TEST(Overlap, MonotoneInFinerLevelOnSegment) {
  const auto mu = generate("segment", GenParams{}, 512, 0);
  const auto fam = build_family(mu, 0, 8);
  for (int k = 0; k <= 8; ++k)
    for (int j = k + 1; j <= 8; ++j) EXPECT_GE(overlap_counts(fam, mu, k, j), overlap_counts(fam, mu, k, j - 1));
}

TEST(Overlap, BoundFormula) {
  EXPECT_DOUBLE_EQ(overlap_bound(2.0, 1, 3, 2.0), std::pow(2.0, 3 - 1 + 3 + 1));
}
