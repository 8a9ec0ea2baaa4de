#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "pnal/scene.hpp"

namespace pnal {

// A partition of a scene's points into clusters; the unit of label correction.
struct ClusterSet {
  std::vector<int> cluster_of;            // per-point cluster id in {0..count-1}
  std::vector<std::vector<int>> members;  // per-cluster ascending point ids

  int count() const { return static_cast<int>(members.size()); }
  const std::vector<int>& cluster_members(int cluster_id) const;
  void validate() const;  // partition property
};

// Pluggable clustering front-end. Only density-based clustering is
// implemented; alternatives can be added behind this interface.
class Clusterer {
 public:
  virtual ~Clusterer() = default;
  virtual ClusterSet cluster(const Scene& scene) const = 0;
};

// Density-based clustering over the 6-d feature (position scaled uniformly
// into the unit cube, concatenated with rgb). Noise points become singleton
// clusters. Cluster ids are canonicalized by first occurrence in point order,
// so the assignment is deterministic for a fixed point order.
ClusterSet dbscan_cluster(const Scene& scene, double eps = 0.018, int min_pts = 10);

class DbscanClusterer final : public Clusterer {
 public:
  DbscanClusterer(double eps, int min_pts) : eps_(eps), min_pts_(min_pts) {}
  ClusterSet cluster(const Scene& scene) const override {
    return dbscan_cluster(scene, eps_, min_pts_);
  }

 private:
  double eps_;
  int min_pts_;
};

// Ground-truth instance partition, the upper bound for cluster-based
// correction. Requires instance ids.
ClusterSet clusters_from_instances(const Scene& scene);

class InstanceClusterer final : public Clusterer {
 public:
  ClusterSet cluster(const Scene& scene) const override { return clusters_from_instances(scene); }
};

// Dump format: one `point_id cluster_id` line per point.
void write_cluster_dump(std::ostream& out, const ClusterSet& clusters);
ClusterSet read_cluster_dump(std::istream& in);

}  // namespace pnal
