#pragma once

#include <vector>

#include "hals/geometry.hpp"

namespace hals {

// Exact nearest-neighbour search over a fixed point set (3D kd-tree,
// median split). Build once, query from any thread.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Point3>& points);

  // Returns (point index, squared distance).
  std::pair<int, double> nearest(const Point3& query) const;

  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int left = -1, right = -1;
    int point = -1;   // index into points_
    int axis = 0;
  };

  int build(std::vector<int>& idx, int lo, int hi, int depth);
  void search(int node, const Point3& q, int* best, double* best_d2) const;

  std::vector<Point3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace hals
