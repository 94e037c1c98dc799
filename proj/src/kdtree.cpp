#include "hals/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace hals {

namespace {

inline double coord(const Point3& p, int axis) {
  return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
}

}  // namespace

KdTree3::KdTree3(const std::vector<Point3>& points) : points_(points) {
  HALS_CHECK(!points_.empty(), "kdtree: empty point set");
  std::vector<int> idx(points_.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, int(idx.size()), 0);
}

int KdTree3::build(std::vector<int>& idx, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const int mid = (lo + hi) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                   [&](int a, int b) {
                     return coord(points_[a], axis) < coord(points_[b], axis);
                   });
  Node node;
  node.point = idx[mid];
  node.axis = axis;
  const int self = int(nodes_.size());
  nodes_.push_back(node);
  const int left = build(idx, lo, mid, depth + 1);
  const int right = build(idx, mid + 1, hi, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search(int node, const Point3& q, int* best, double* best_d2) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Point3& p = points_[n.point];
  const double d2 = (p - q).squared_norm();
  if (d2 < *best_d2) {
    *best_d2 = d2;
    *best = n.point;
  }
  const double delta = coord(q, n.axis) - coord(p, n.axis);
  const int near = delta < 0 ? n.left : n.right;
  const int far = delta < 0 ? n.right : n.left;
  search(near, q, best, best_d2);
  if (delta * delta < *best_d2) search(far, q, best, best_d2);
}

std::pair<int, double> KdTree3::nearest(const Point3& query) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, query, &best, &best_d2);
  return {best, best_d2};
}

}  // namespace hals
