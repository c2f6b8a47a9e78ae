#include "objrecon/core/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace objrecon {

namespace {
constexpr int kLeafSize = 8;
}

void KdTree3::build(const std::vector<Vec3>& points) {
  points_ = points;
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.clear();
  nodes_.reserve(points.empty() ? 0 : 2 * points.size() / kLeafSize + 2);
  root_ = points.empty() ? -1 : build_recursive(0, static_cast<int>(points.size()));
}

int KdTree3::build_recursive(int begin, int end) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].point = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  double split = points_[order_[mid]][axis];

  nodes_[id].axis = axis;
  nodes_[id].split = split;
  int left = build_recursive(begin, mid);
  int right = build_recursive(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree3::nearest_recursive(int node, const Vec3& q, Result& best) const {
  const Node& n = nodes_[node];
  if (n.count > 0 || n.left < 0) {
    for (int i = n.point; i < n.point + n.count; ++i) {
      double d2 = (points_[order_[i]] - q).squaredNorm();
      if (d2 < best.distance) {
        best.distance = d2;
        best.index = order_[i];
      }
    }
    return;
  }
  double delta = q[n.axis] - n.split;
  int first = delta < 0 ? n.left : n.right;
  int second = delta < 0 ? n.right : n.left;
  nearest_recursive(first, q, best);
  if (delta * delta < best.distance) nearest_recursive(second, q, best);
}

KdTree3::Result KdTree3::nearest(const Vec3& query) const {
  Result best;
  if (root_ < 0) return best;
  nearest_recursive(root_, query, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

void KdTree3::radius_recursive(int node, const Vec3& q, double r2, double r,
                               std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (n.count > 0 || n.left < 0) {
    for (int i = n.point; i < n.point + n.count; ++i) {
      if ((points_[order_[i]] - q).squaredNorm() <= r2) out.push_back(order_[i]);
    }
    return;
  }
  double delta = q[n.axis] - n.split;
  if (delta < r) radius_recursive(n.left, q, r2, r, out);
  if (delta > -r) radius_recursive(n.right, q, r2, r, out);
}

std::vector<int> KdTree3::radius_search(const Vec3& query, double radius) const {
  std::vector<int> out;
  if (root_ < 0) return out;
  radius_recursive(root_, query, radius * radius, radius, out);
  return out;
}

std::vector<int> KdTree3::knn(const Vec3& query, int k) const {
  // max-heap of (distance^2, index), capped at k
  std::priority_queue<std::pair<double, int>> heap;
  struct Walker {
    const KdTree3* tree;
    const Vec3& q;
    int k;
    std::priority_queue<std::pair<double, int>>& heap;
    void visit(int node) {
      const Node& n = tree->nodes_[node];
      if (n.count > 0 || n.left < 0) {
        for (int i = n.point; i < n.point + n.count; ++i) {
          int idx = tree->order_[i];
          double d2 = (tree->points_[idx] - q).squaredNorm();
          if (static_cast<int>(heap.size()) < k) {
            heap.emplace(d2, idx);
          } else if (d2 < heap.top().first) {
            heap.pop();
            heap.emplace(d2, idx);
          }
        }
        return;
      }
      double delta = q[n.axis] - n.split;
      int first = delta < 0 ? n.left : n.right;
      int second = delta < 0 ? n.right : n.left;
      visit(first);
      double worst = static_cast<int>(heap.size()) < k
                         ? std::numeric_limits<double>::infinity()
                         : heap.top().first;
      if (delta * delta < worst) visit(second);
    }
  };
  if (root_ >= 0 && k > 0) {
    Walker w{this, query, k, heap};
    w.visit(root_);
  }
  std::vector<int> out(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

}  // namespace objrecon
