#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pnal/scene.hpp"

namespace pnal {

// Desk-scale synthetic indoor scenes: floor tiles (class 0) plus
// furniture-like boxes (classes 1..M-1), points sampled uniformly on the
// visible surfaces, one base color per class with a per-instance offset and a
// smaller per-point jitter.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::array<double, 3> room = {2.5, 2.5, 1.2};  // meters
  int class_count = 6;
  int instances_per_class = 2;
  int points_per_instance = 500;
  double color_noise = 0.02;
  bool contact = true;  // place boxes touching each other and the floor

  void validate() const;
};

// Deterministic for a fixed spec: labels and instance ids are always present,
// every instance is single-class, spatially connected, and carries exactly
// points_per_instance points. Throws when the boxes cannot be packed into the
// room.
Scene generate_scene(const SynthSpec& spec);

// Independent scenes from per-scene sub-seeds of `seed`.
std::vector<Scene> generate_dataset(const SynthSpec& spec, int scene_count, std::uint64_t seed);

}  // namespace pnal
