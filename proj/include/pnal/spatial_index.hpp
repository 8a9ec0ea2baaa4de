#pragma once

#include <memory>
#include <vector>

#include "pnal/kdtree.hpp"
#include "pnal/scene.hpp"

namespace pnal {

// Immutable 3-d acceleration structure over a scene's positions. Safe to
// query from multiple threads once constructed.
class SpatialIndex {
 public:
  explicit SpatialIndex(const Scene& scene);

  int size() const { return tree_->size(); }

  // k nearest neighbors of point `query_id`, sorted by non-decreasing
  // distance; the query point itself comes first (distance 0). Ties break
  // toward the lower point id.
  std::vector<int> knn(int query_id, int k) const;

  // Neighbors of an arbitrary position.
  std::vector<int> knn_at(const Vec3& position, int k) const;

  // All points within `r` of point `query_id` (inclusive), sorted by id.
  std::vector<int> radius(int query_id, double r) const;

 private:
  std::unique_ptr<KdTree> tree_;
};

SpatialIndex build_index(const Scene& scene);

}  // namespace pnal
