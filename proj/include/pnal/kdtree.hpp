#pragma once

#include <vector>

namespace pnal {

// Exact k-d tree over n points of runtime dimension d (row-major flat data).
// Queries return exactly what an exhaustive scan would, with distance ties
// broken by lower point id.
class KdTree {
 public:
  KdTree(std::vector<double> flat_points, int dim);

  int size() const { return n_; }
  int dim() const { return dim_; }
  const double* point(int id) const { return data_.data() + static_cast<std::size_t>(id) * dim_; }

  // k nearest neighbors of `query`, sorted by (distance, id). k must be in [1, n].
  std::vector<int> knn(const double* query, int k) const;

  // All ids within `radius` (inclusive) of `query`, sorted by id.
  std::vector<int> radius(const double* query, double radius) const;

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(int* ids, int count, int depth);
  double dist2(const double* a, const double* b) const;

  std::vector<double> data_;
  int dim_;
  int n_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace pnal
