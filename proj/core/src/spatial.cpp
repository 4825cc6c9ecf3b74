#include "rectify/spatial.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace rect {

BallIndex::BallIndex(const PointSet& points, std::size_t leaf_size)
    : pts_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  perm_.resize(static_cast<std::size_t>(points.cols()));
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  if (!perm_.empty()) build(0, perm_.size());
}

int BallIndex::build(std::size_t begin, std::size_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = pts_.col(static_cast<Eigen::Index>(perm_[begin]));
  node.hi = node.lo;
  for (std::size_t i = begin + 1; i < end; ++i) {
    const auto c = pts_.col(static_cast<Eigen::Index>(perm_[i]));
    node.lo = node.lo.cwiseMin(c);
    node.hi = node.hi.cwiseMax(c);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= leaf_size_) return id;

  Eigen::Index axis;
  const double spread = (node.hi - node.lo).maxCoeff(&axis);
  if (spread <= 0.0) return id;  // all points coincide
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + static_cast<std::ptrdiff_t>(begin),
                   perm_.begin() + static_cast<std::ptrdiff_t>(mid),
                   perm_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = pts_(axis, static_cast<Eigen::Index>(a));
                     const double vb = pts_(axis, static_cast<Eigen::Index>(b));
                     return va < vb || (va == vb && a < b);
                   });
  const int l = build(begin, mid);
  const int r = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = l;
  nodes_[static_cast<std::size_t>(id)].right = r;
  return id;
}

double BallIndex::box_dist2(const Node& n, const PointRef& p) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double v = p[i];
    const double d = v < n.lo[i] ? n.lo[i] - v : (v > n.hi[i] ? v - n.hi[i] : 0.0);
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> BallIndex::query(const PointRef& center, double r) const {
  std::vector<std::size_t> out;
  if (nodes_.empty()) return out;
  const double lim = r + kBallTol;
  const double lim2 = lim * lim;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_dist2(n, center) > lim2) continue;
    if (n.left < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const auto idx = perm_[i];
        if ((pts_.col(static_cast<Eigen::Index>(idx)) - center).norm() <= lim) out.push_back(idx);
      }
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t BallIndex::nearest(const PointRef& p) const {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  std::vector<int> stack{0};
  while (!stack.empty() && !nodes_.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_dist2(n, p) > best) continue;
    if (n.left < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const auto idx = perm_[i];
        const double d = (pts_.col(static_cast<Eigen::Index>(idx)) - p).squaredNorm();
        if (d < best || (d == best && idx < best_idx)) {
          best = d;
          best_idx = idx;
        }
      }
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  return best_idx;
}

}  // namespace rect
