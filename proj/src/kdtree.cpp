#include "pnal/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace pnal {

KdTree::KdTree(std::vector<double> flat_points, int dim) : data_(std::move(flat_points)), dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("KdTree: dimension must be >= 1");
  if (data_.size() % dim_ != 0) throw std::invalid_argument("KdTree: data size not a multiple of dim");
  n_ = static_cast<int>(data_.size() / dim_);
  if (n_ == 0) throw std::invalid_argument("KdTree: no points");
  std::vector<int> ids(n_);
  std::iota(ids.begin(), ids.end(), 0);
  nodes_.reserve(n_);
  root_ = build(ids.data(), n_, 0);
}

double KdTree::dist2(const double* a, const double* b) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int KdTree::build(int* ids, int count, int depth) {
  if (count == 0) return -1;
  const int axis = depth % dim_;
  const int mid = count / 2;
  std::nth_element(ids, ids + mid, ids + count, [&](int a, int b) {
    const double va = point(a)[axis];
    const double vb = point(b)[axis];
    return va < vb || (va == vb && a < b);
  });
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back({ids[mid], axis, -1, -1});
  const int left = build(ids, mid, depth + 1);
  const int right = build(ids + mid + 1, count - mid - 1, depth + 1);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

namespace {
// Max-heap entry ordered by (dist2, id); the top is the current worst.
struct Cand {
  double d2;
  int id;
  bool operator<(const Cand& o) const { return d2 < o.d2 || (d2 == o.d2 && id < o.id); }
};
}  // namespace

std::vector<int> KdTree::knn(const double* query, int k) const {
  if (k < 1 || k > n_) throw std::invalid_argument("knn: k must be in [1, point count]");
  std::priority_queue<Cand> heap;

  // Iterative DFS, near child first. No pruning on exact ties so that equal
  // distances always resolve to the lower ids.
  std::vector<int> stack;
  stack.reserve(64);
  stack.push_back(root_);
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    if (ni < 0) continue;
    const Node& node = nodes_[ni];
    const double* p = point(node.point);
    const Cand c{dist2(query, p), node.point};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
    const double plane = query[node.axis] - p[node.axis];
    const int near = plane <= 0.0 ? node.left : node.right;
    const int far = plane <= 0.0 ? node.right : node.left;
    const bool visit_far =
        static_cast<int>(heap.size()) < k || plane * plane <= heap.top().d2;
    if (visit_far && far >= 0) stack.push_back(far);
    if (near >= 0) stack.push_back(near);
  }

  std::vector<Cand> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::sort(out.begin(), out.end());
  std::vector<int> ids(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) ids[i] = out[i].id;
  return ids;
}

std::vector<int> KdTree::radius(const double* query, double radius) const {
  if (radius < 0.0) throw std::invalid_argument("radius query: radius must be >= 0");
  const double r2 = radius * radius;
  std::vector<int> out;
  std::vector<int> stack;
  stack.reserve(64);
  stack.push_back(root_);
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    if (ni < 0) continue;
    const Node& node = nodes_[ni];
    const double* p = point(node.point);
    if (dist2(query, p) <= r2) out.push_back(node.point);
    const double plane = query[node.axis] - p[node.axis];
    const int near = plane <= 0.0 ? node.left : node.right;
    const int far = plane <= 0.0 ? node.right : node.left;
    if (plane * plane <= r2 && far >= 0) stack.push_back(far);
    if (near >= 0) stack.push_back(near);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pnal
