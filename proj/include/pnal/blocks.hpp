#pragma once

#include <cstdint>
#include <vector>

#include "pnal/scene.hpp"

namespace pnal {

// An xy sliding-window block over a scene (z is never split).
struct SceneBlock {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double size = 0.0;
  std::vector<int> members;  // ascending point ids
};

// Sliding windows of `block_size` at `stride` over the xy footprint, anchored
// at the scene minimum. Window origins sit on the stride lattice; along each
// axis the last window is unbounded on its far side so every point is covered.
// Empty blocks are omitted.
std::vector<SceneBlock> block_partition(const Scene& scene, double block_size = 1.0,
                                        double stride = 0.5);

// Exactly n point ids: without replacement when the block has >= n points,
// with replacement otherwise. Pure function of (block, n, seed).
std::vector<int> sample_block(const SceneBlock& block, int n = 4096, std::uint64_t seed = 0);

}  // namespace pnal
