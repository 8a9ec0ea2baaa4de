#pragma once

#include <cstdint>
#include <vector>

#include "pnal/cleaning.hpp"
#include "pnal/spatial_index.hpp"

namespace pnal {

// Boundary points under the current labels plus their k nearest neighbors.
// `revision` records the CleaningState revision the band was extracted from.
struct BoundaryBand {
  std::vector<bool> in_band;
  std::vector<int> members;  // ascending ids
  int k = 0;
  std::uint64_t revision = 0;

  int size() const { return static_cast<int>(members.size()); }
};

// A point is a boundary point when its k nearest neighbors (the point itself
// included) carry at least two distinct labels; the band is the union of the
// k-NN sets of all boundary points.
BoundaryBand extract_boundary(const std::vector<int>& labels, const SpatialIndex& index,
                              int k = 20, std::uint64_t revision = 0, int workers = 1);

// One boundary-restricted cleaning pass: reliability from the history,
// cluster eligibility and occurrence counts restricted to reliable points
// inside the band, winner labels written to band members of the winning
// clusters only. Points outside the band are never touched. Throws if the
// band was not extracted from the state's current labels.
//
// Returns the (cluster, winner) pairs that were applied.
std::vector<std::pair<int, int>> boundary_cleaning_epoch(CleaningState& state,
                                                         const BoundaryBand& band,
                                                         const ClusterSet& clusters,
                                                         const PredictionHistory& history,
                                                         double sigma, double gamma, Rng& rng,
                                                         bool mask_on_confirm = true);

// Drives prediction and fitting for progressive_loop; the trainer supplies a
// block-SGD implementation, tests can supply oracles.
class PredictorDriver {
 public:
  virtual ~PredictorDriver() = default;
  virtual std::vector<int> predict_classes() = 0;
  virtual void fit_epoch(const std::vector<int>& labels, const std::vector<bool>& include) = 0;
};

// Single-scene progressive boundary cleaning: per epoch predict, record,
// extract the band from the latest labels (or keep the first band when
// `progressive` is off), clean inside the band, then fit on everything except
// band points whose label was never replaced.
CleaningState progressive_loop(CleaningState state, const SpatialIndex& index,
                               const ClusterSet& clusters, PredictionHistory& history,
                               PredictorDriver& driver, int epochs, int k, double sigma,
                               double gamma, std::uint64_t seed, bool progressive = true,
                               bool mask_on_confirm = true, int workers = 1);

}  // namespace pnal
