#include "pnal/spatial_index.hpp"

#include <stdexcept>

namespace pnal {

SpatialIndex::SpatialIndex(const Scene& scene) {
  if (scene.size() == 0) throw std::invalid_argument("spatial index: empty scene");
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(scene.size()) * 3);
  for (const Vec3& p : scene.positions) flat.insert(flat.end(), p.begin(), p.end());
  tree_ = std::make_unique<KdTree>(std::move(flat), 3);
}

std::vector<int> SpatialIndex::knn(int query_id, int k) const {
  if (query_id < 0 || query_id >= tree_->size())
    throw std::invalid_argument("knn: query id out of range");
  return tree_->knn(tree_->point(query_id), k);
}

std::vector<int> SpatialIndex::knn_at(const Vec3& position, int k) const {
  return tree_->knn(position.data(), k);
}

std::vector<int> SpatialIndex::radius(int query_id, double r) const {
  if (query_id < 0 || query_id >= tree_->size())
    throw std::invalid_argument("radius: query id out of range");
  return tree_->radius(tree_->point(query_id), r);
}

SpatialIndex build_index(const Scene& scene) { return SpatialIndex(scene); }

}  // namespace pnal
