#include "rectify/nets.hpp"

#include "rectify/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

namespace rect {

namespace {

// Distances are compared on the kGeomTol grid so that near-equal candidates
// resolve to the lowest index straight from the heap.
struct HeapEntry {
  std::int64_t key;
  double dist;
  std::size_t idx;
};
struct HeapLess {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.key != b.key) return a.key < b.key;
    return a.idx > b.idx;
  }
};

std::int64_t grid_key(double d) { return std::llround(d / kGeomTol); }

}  // namespace

GreedyTraversal farthest_point_traversal(const PointSet& points, double stop_radius) {
  GreedyTraversal tr;
  const std::size_t n = static_cast<std::size_t>(points.cols());
  if (n == 0) return tr;
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (lex_less(points.col(static_cast<Eigen::Index>(i)), points.col(static_cast<Eigen::Index>(first))))
      first = i;

  BallIndex index(points);
  std::vector<double> dist(n);
  std::vector<char> chosen(n, 0);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap;
  const auto c0 = points.col(static_cast<Eigen::Index>(first));
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = (points.col(static_cast<Eigen::Index>(i)) - c0).norm();
    if (i != first) heap.push({grid_key(dist[i]), dist[i], i});
  }
  chosen[first] = 1;
  tr.order.push_back(first);
  tr.radii.push_back(std::numeric_limits<double>::infinity());

  auto valid = [&](const HeapEntry& e) { return !chosen[e.idx] && e.dist == dist[e.idx]; };
  while (!heap.empty()) {
    while (!heap.empty() && !valid(heap.top())) heap.pop();
    if (heap.empty()) break;
    const double top = heap.top().dist;
    if (top < stop_radius - kBallTol) break;
    const std::size_t c = heap.top().idx;
    heap.pop();
    chosen[c] = 1;
    tr.order.push_back(c);
    tr.radii.push_back(dist[c]);
    const auto pc = points.col(static_cast<Eigen::Index>(c));
    // Only points within the current covering radius can get closer.
    for (auto p : index.query(pc, top)) {
      if (chosen[p]) continue;
      const double nd = (points.col(static_cast<Eigen::Index>(p)) - pc).norm();
      if (nd < dist[p]) {
        dist[p] = nd;
        heap.push({grid_key(nd), nd, p});
      }
    }
  }
  return tr;
}

std::size_t net_prefix(const GreedyTraversal& tr, double delta) {
  std::size_t m = 0;
  while (m < tr.radii.size() && tr.radii[m] >= delta - kBallTol) ++m;
  return m;
}

std::vector<std::size_t> maximal_net(const PointSet& points, double delta) {
  if (points.cols() == 0) throw std::invalid_argument("maximal_net: empty point set");
  if (!(delta > 0)) throw std::invalid_argument("maximal_net: delta must be positive");
  const auto tr = farthest_point_traversal(points, delta);
  return {tr.order.begin(), tr.order.begin() + static_cast<std::ptrdiff_t>(net_prefix(tr, delta))};
}

double MultiresolutionFamily::radius(int k) const { return lambda2 * std::ldexp(1.0, -k); }

Point MultiresolutionFamily::center(const DiscreteMeasure& mu, int k, std::size_t j) const {
  return mu.atoms.col(static_cast<Eigen::Index>(level(k).indices.at(j)));
}

Ball MultiresolutionFamily::ball(const DiscreteMeasure& mu, int k, std::size_t j) const {
  return Ball{center(mu, k, j), radius(k)};
}

double min_lambda2(int J) {
  const double a = 1.0 - std::ldexp(1.0, -J);
  return 1.0 / (a * a);
}

MultiresolutionFamily build_family(const DiscreteMeasure& mu, int k0, int k_max, double lambda2,
                                   int J) {
  if (k_max < k0) throw std::invalid_argument("build_family: k_max < k0");
  if (J < 1) throw std::invalid_argument("build_family: J must be >= 1");
  if (!(lambda2 > min_lambda2(J)))
    throw std::invalid_argument("build_family: lambda2 must exceed (1 - 2^-J)^-2");
  if (mu.size() == 0) throw std::invalid_argument("build_family: empty measure");
  MultiresolutionFamily fam;
  fam.k0 = k0;
  fam.k_max = k_max;
  fam.lambda2 = lambda2;
  fam.J = J;
  const auto tr = farthest_point_traversal(mu.atoms, std::ldexp(1.0, -k_max));
  for (int k = k0; k <= k_max; ++k) {
    NetLevel lvl;
    lvl.k = k;
    lvl.separation = std::ldexp(1.0, -k);
    const std::size_t m = net_prefix(tr, lvl.separation);
    lvl.indices.assign(tr.order.begin(), tr.order.begin() + static_cast<std::ptrdiff_t>(m));
    fam.levels.push_back(std::move(lvl));
  }
  return fam;
}

std::vector<NetViolation> check_family(const MultiresolutionFamily& fam, const DiscreteMeasure& mu) {
  std::vector<NetViolation> out;
  for (int k = fam.k0; k <= fam.k_max; ++k) {
    const auto& lvl = fam.level(k);
    const double sep = lvl.separation;
    PointSet centers(mu.dim(), static_cast<Eigen::Index>(lvl.indices.size()));
    for (std::size_t j = 0; j < lvl.indices.size(); ++j)
      centers.col(static_cast<Eigen::Index>(j)) = mu.atoms.col(static_cast<Eigen::Index>(lvl.indices[j]));
    BallIndex cidx(centers);
    for (std::size_t j = 0; j < lvl.indices.size(); ++j) {
      for (auto o : cidx.query(centers.col(static_cast<Eigen::Index>(j)), sep)) {
        if (o <= j) continue;
        const double d = (centers.col(static_cast<Eigen::Index>(j)) - centers.col(static_cast<Eigen::Index>(o))).norm();
        if (d < sep - kBallTol) out.push_back({k, "separation", j, o, d});
      }
    }
    for (Eigen::Index a = 0; a < mu.size(); ++a) {
      const auto nn = cidx.nearest(mu.atoms.col(a));
      const double d = (mu.atoms.col(a) - centers.col(static_cast<Eigen::Index>(nn))).norm();
      if (d > sep + kBallTol) out.push_back({k, "maximality", static_cast<std::size_t>(a), nn, d});
    }
    if (k > fam.k0) {
      const auto& prev = fam.level(k - 1).indices;
      std::vector<std::size_t> cur = lvl.indices;
      std::sort(cur.begin(), cur.end());
      for (auto p : prev)
        if (!std::binary_search(cur.begin(), cur.end(), p)) out.push_back({k, "nestedness", p, 0, 0.0});
    }
  }
  return out;
}

namespace {

// For every ball of level k, the atoms it contains.
std::vector<std::vector<std::size_t>> level_members(const MultiresolutionFamily& fam,
                                                    const DiscreteMeasure& mu,
                                                    const BallIndex& index, int k) {
  const auto& lvl = fam.level(k);
  std::vector<std::vector<std::size_t>> members(lvl.indices.size());
  for (std::size_t j = 0; j < lvl.indices.size(); ++j)
    members[j] = index.query(mu.atoms.col(static_cast<Eigen::Index>(lvl.indices[j])), fam.radius(k));
  return members;
}

std::size_t overlap_from_members(const std::vector<std::vector<std::size_t>>& coarse,
                                 const std::vector<std::vector<std::size_t>>& fine,
                                 std::size_t n_atoms) {
  // atom -> fine balls containing it
  std::vector<std::vector<std::size_t>> by_atom(n_atoms);
  for (std::size_t b = 0; b < fine.size(); ++b)
    for (auto a : fine[b]) by_atom[a].push_back(b);
  std::vector<std::size_t> stamp(fine.size(), std::numeric_limits<std::size_t>::max());
  std::size_t best = 0;
  for (std::size_t B = 0; B < coarse.size(); ++B) {
    std::size_t cnt = 0;
    for (auto a : coarse[B])
      for (auto b : by_atom[a])
        if (stamp[b] != B) {
          stamp[b] = B;
          ++cnt;
        }
    best = std::max(best, cnt);
  }
  return best;
}

}  // namespace

std::size_t overlap_counts(const MultiresolutionFamily& fam, const DiscreteMeasure& mu, int k, int j) {
  if (k < fam.k0 || j < k || j > fam.k_max) throw std::invalid_argument("overlap_counts: need k0 <= k <= j <= k_max");
  BallIndex index(mu.atoms);
  return overlap_from_members(level_members(fam, mu, index, k), level_members(fam, mu, index, j),
                              static_cast<std::size_t>(mu.size()));
}

std::vector<std::vector<std::size_t>> overlap_table(const MultiresolutionFamily& fam,
                                                    const DiscreteMeasure& mu) {
  BallIndex index(mu.atoms);
  std::vector<std::vector<std::vector<std::size_t>>> members;
  for (int k = fam.k0; k <= fam.k_max; ++k) members.push_back(level_members(fam, mu, index, k));
  const std::size_t L = members.size();
  std::vector<std::vector<std::size_t>> table(L, std::vector<std::size_t>(L, 0));
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = a; b < L; ++b)
      table[a][b] = overlap_from_members(members[a], members[b], static_cast<std::size_t>(mu.size()));
  return table;
}

double overlap_bound(double D, int k, int j, double lambda2) {
  return std::pow(D, j - k + 3 + std::log2(lambda2));
}

}  // namespace rect
