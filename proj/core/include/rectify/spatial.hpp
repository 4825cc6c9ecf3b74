#pragma once

#include "rectify/geometry.hpp"

#include <cstddef>
#include <vector>

namespace rect {

// Static kd-tree over the columns of a point matrix for closed-ball queries.
// Holds a reference: the matrix must outlive the index.
class BallIndex {
 public:
  explicit BallIndex(const PointSet& points, std::size_t leaf_size = 16);

  // Indices with |p - center| <= r + kBallTol, in increasing index order.
  std::vector<std::size_t> query(const PointRef& center, double r) const;
  // Index of a nearest point; ties go to the lowest index.
  std::size_t nearest(const PointRef& p) const;
  std::size_t size() const { return perm_.size(); }

 private:
  struct Node {
    Eigen::VectorXd lo, hi;  // bounding box
    std::size_t begin = 0, end = 0;
    int left = -1, right = -1;
  };
  int build(std::size_t begin, std::size_t end);
  double box_dist2(const Node& n, const PointRef& p) const;

  const PointSet& pts_;
  std::size_t leaf_size_;
  std::vector<std::size_t> perm_;
  std::vector<Node> nodes_;
};

}  // namespace rect
