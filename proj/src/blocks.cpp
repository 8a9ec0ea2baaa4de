#include "pnal/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnal/rng.hpp"

namespace pnal {

namespace {
int axis_window_count(double extent, double stride) {
  // floor with a small slack so an extent that is an exact stride multiple
  // (up to fp noise) still yields extent/stride windows.
  return std::max(1, static_cast<int>(std::floor(extent / stride + 1e-9)));
}
}  // namespace

std::vector<SceneBlock> block_partition(const Scene& scene, double block_size, double stride) {
  if (scene.size() == 0) throw std::invalid_argument("block_partition: empty scene");
  if (block_size <= 0.0) throw std::invalid_argument("block_partition: block_size must be > 0");
  if (stride <= 0.0 || stride > block_size)
    throw std::invalid_argument("block_partition: stride must be in (0, block_size]");

  Vec3 lo, hi;
  scene.bounds(lo, hi);
  const int nx = axis_window_count(hi[0] - lo[0], stride);
  const int ny = axis_window_count(hi[1] - lo[1], stride);

  std::vector<SceneBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(nx) * ny);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const double ox = lo[0] + ix * stride;
      const double oy = lo[1] + iy * stride;
      SceneBlock block;
      block.origin_x = ox;
      block.origin_y = oy;
      block.size = block_size;
      for (int i = 0; i < scene.size(); ++i) {
        const double x = scene.positions[i][0];
        const double y = scene.positions[i][1];
        const bool in_x = x >= ox && (ix == nx - 1 || x < ox + block_size);
        const bool in_y = y >= oy && (iy == ny - 1 || y < oy + block_size);
        if (in_x && in_y) block.members.push_back(i);
      }
      if (!block.members.empty()) blocks.push_back(std::move(block));
    }
  }
  return blocks;
}

std::vector<int> sample_block(const SceneBlock& block, int n, std::uint64_t seed) {
  if (block.members.empty()) throw std::invalid_argument("sample_block: empty block");
  if (n <= 0) throw std::invalid_argument("sample_block: n must be positive");
  Rng rng(seed);
  const int m = static_cast<int>(block.members.size());
  std::vector<int> out;
  out.reserve(n);
  if (m >= n) {
    // partial Fisher-Yates
    std::vector<int> pool = block.members;
    for (int i = 0; i < n; ++i) {
      const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m - i)));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  } else {
    for (int i = 0; i < n; ++i)
      out.push_back(block.members[rng.uniform_int(static_cast<std::uint64_t>(m))]);
  }
  return out;
}

}  // namespace pnal
