#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pnal/scene.hpp"

namespace pnal {

enum class NoiseKind {
  symmetric,
  asymmetric_pairs,
  mixed_asymmetric,
  boundary,
  mixed_instance_boundary,
};

NoiseKind noise_kind_from_string(const std::string& name);
std::string to_string(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::symmetric;
  double tau = 0.0;       // symmetric instance flip rate
  double tau_pair = 0.0;  // within-pair flip rate
  double alpha = 0.0;     // fraction of scenes receiving boundary noise
  double beta = 0.0;      // per-scene boundary noise level
  std::vector<std::pair<int, int>> pairs;
  std::uint64_t seed = 0;

  void validate(int class_count) const;
};

struct NoiseReport {
  double requested_rate = 0.0;
  double measured_rate = 0.0;
  long flipped_points = 0;
};

// Instance-level injectors. All require labels + instance ids and return a
// fresh label vector; an instance's points always move together.
std::vector<int> inject_symmetric(const Scene& scene, double tau, std::uint64_t seed);
std::vector<int> inject_asymmetric_pairs(const Scene& scene, double tau_pair,
                                         const std::vector<std::pair<int, int>>& pairs,
                                         std::uint64_t seed);
// Paired classes flip within their pair at tau_pair; unpaired classes flip
// symmetrically at the rate that makes the expected overall instance noise
// rate equal tau. Throws when that implied rate falls outside [0, 1].
std::vector<int> inject_mixed_asymmetric(const Scene& scene, double tau, double tau_pair,
                                         const std::vector<std::pair<int, int>>& pairs,
                                         std::uint64_t seed);

// Morphological boundary noise: repeatedly pick a class, pick one of its
// points, and if that point sits on a label boundary (a different label among
// its 80 nearest neighbors) flip a distance-weighted random subset of those
// neighbors to its label, until the count of points differing from the clean
// labels reaches beta * |corruptible set|. Only cross-class flips are
// written, which keeps the count monotone so the loop terminates for any
// beta in [0, 1].
std::vector<int> inject_boundary(const Scene& scene, double beta, std::uint64_t seed);

// Applies inject_boundary to round(alpha * |scenes|) scenes chosen without
// replacement; scenes without a label boundary are left untouched.
struct DatasetBoundaryResult {
  std::vector<std::vector<int>> labels;  // per scene (unchanged copies included)
  std::vector<bool> modified;
};
DatasetBoundaryResult inject_dataset_boundary(const std::vector<Scene>& scenes, double alpha,
                                              double beta, std::uint64_t seed);

// Measured instance flip rate (fraction of instances whose label changed).
double measured_instance_rate(const Scene& scene, const std::vector<int>& noisy_labels);

NoiseReport make_instance_report(const Scene& scene, const std::vector<int>& noisy,
                                 double requested);
NoiseReport make_boundary_report(const Scene& scene, const std::vector<int>& noisy,
                                 double requested);

// Every point within the 80-NN neighborhood of some clean-label boundary
// point. Boundary flips can only land here.
std::vector<int> boundary_band_80(const Scene& scene);

// The subset of the band that boundary injection can actually corrupt: points
// with a different-class boundary point whose neighborhood reaches them with
// positive flip probability. The loop threshold is beta times this size.
std::vector<int> boundary_corruptible_set(const Scene& scene);

}  // namespace pnal
