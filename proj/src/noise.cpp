#include "pnal/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pnal/rng.hpp"
#include "pnal/spatial_index.hpp"

namespace pnal {

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "symmetric") return NoiseKind::symmetric;
  if (name == "asymmetric_pairs") return NoiseKind::asymmetric_pairs;
  if (name == "mixed_asymmetric") return NoiseKind::mixed_asymmetric;
  if (name == "boundary") return NoiseKind::boundary;
  if (name == "mixed_instance_boundary") return NoiseKind::mixed_instance_boundary;
  throw std::invalid_argument("unknown noise kind: " + name);
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::symmetric: return "symmetric";
    case NoiseKind::asymmetric_pairs: return "asymmetric_pairs";
    case NoiseKind::mixed_asymmetric: return "mixed_asymmetric";
    case NoiseKind::boundary: return "boundary";
    case NoiseKind::mixed_instance_boundary: return "mixed_instance_boundary";
  }
  throw std::invalid_argument("unknown noise kind");
}

void NoiseSpec::validate(int class_count) const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(tau) || !rate_ok(tau_pair) || !rate_ok(alpha) || !rate_ok(beta))
    throw std::invalid_argument("noise spec: rates must lie in [0,1]");
  std::set<int> used;
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= class_count || b >= class_count)
      throw std::invalid_argument("noise spec: pair references an invalid class id");
    if (a == b) throw std::invalid_argument("noise spec: pair of identical classes");
    if (!used.insert(a).second || !used.insert(b).second)
      throw std::invalid_argument("noise spec: overlapping pairs");
  }
}

namespace {

struct Instance {
  int id;
  int label;
  std::vector<int> points;
};

// Instances ordered by ascending instance id; the instance label is taken
// from its lowest point id.
std::vector<Instance> collect_instances(const Scene& scene) {
  if (!scene.has_labels()) throw std::invalid_argument("instance noise: scene has no labels");
  if (!scene.has_instances())
    throw std::invalid_argument("instance noise: scene has no instance ids");
  std::map<int, Instance> by_id;
  for (int p = 0; p < scene.size(); ++p) {
    auto [it, fresh] = by_id.try_emplace(scene.instance_ids[p]);
    if (fresh) {
      it->second.id = scene.instance_ids[p];
      it->second.label = scene.labels[p];
    }
    it->second.points.push_back(p);
  }
  std::vector<Instance> out;
  out.reserve(by_id.size());
  for (auto& [id, inst] : by_id) out.push_back(std::move(inst));
  return out;
}

void overwrite(std::vector<int>& labels, const Instance& inst, int label) {
  for (int p : inst.points) labels[p] = label;
}

}  // namespace

std::vector<int> inject_symmetric(const Scene& scene, double tau, std::uint64_t seed) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("inject_symmetric: tau outside [0,1]");
  const auto instances = collect_instances(scene);
  const int m = scene.class_count;
  std::vector<int> noisy = scene.labels;
  Rng rng(seed);
  for (const Instance& inst : instances) {
    if (rng.uniform() >= tau) continue;
    // uniform over the m-1 labels != original
    int pick = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m - 1)));
    if (pick >= inst.label) ++pick;
    overwrite(noisy, inst, pick);
  }
  return noisy;
}

std::vector<int> inject_asymmetric_pairs(const Scene& scene, double tau_pair,
                                         const std::vector<std::pair<int, int>>& pairs,
                                         std::uint64_t seed) {
  if (tau_pair < 0.0 || tau_pair > 1.0)
    throw std::invalid_argument("inject_asymmetric_pairs: tau_pair outside [0,1]");
  NoiseSpec spec;
  spec.pairs = pairs;
  spec.validate(scene.class_count);  // overlapping / invalid pairs
  std::vector<int> partner(scene.class_count, -1);
  for (const auto& [a, b] : pairs) {
    partner[a] = b;
    partner[b] = a;
  }
  const auto instances = collect_instances(scene);
  std::vector<int> noisy = scene.labels;
  Rng rng(seed);
  for (const Instance& inst : instances) {
    if (partner[inst.label] < 0) continue;
    if (rng.uniform() < tau_pair) overwrite(noisy, inst, partner[inst.label]);
  }
  return noisy;
}

std::vector<int> inject_mixed_asymmetric(const Scene& scene, double tau, double tau_pair,
                                         const std::vector<std::pair<int, int>>& pairs,
                                         std::uint64_t seed) {
  if (tau < 0.0 || tau > 1.0 || tau_pair < 0.0 || tau_pair > 1.0)
    throw std::invalid_argument("inject_mixed_asymmetric: rates outside [0,1]");
  NoiseSpec spec;
  spec.pairs = pairs;
  spec.validate(scene.class_count);
  std::vector<int> partner(scene.class_count, -1);
  for (const auto& [a, b] : pairs) {
    partner[a] = b;
    partner[b] = a;
  }

  const auto instances = collect_instances(scene);
  long paired = 0;
  for (const Instance& inst : instances)
    if (partner[inst.label] >= 0) ++paired;
  const long total = static_cast<long>(instances.size());
  const double f_paired = static_cast<double>(paired) / static_cast<double>(total);

  // Solve f_paired * tau_pair + (1 - f_paired) * r = tau for the symmetric
  // rate r applied to unpaired instances.
  double r = 0.0;
  if (paired == total) {
    if (std::abs(tau - tau_pair) > 1e-12)
      throw std::invalid_argument(
          "inject_mixed_asymmetric: all instances paired, overall rate fixed at tau_pair");
  } else {
    r = (tau - f_paired * tau_pair) / (1.0 - f_paired);
    if (r < -1e-12 || r > 1.0 + 1e-12)
      throw std::invalid_argument(
          "inject_mixed_asymmetric: implied unpaired flip rate " + std::to_string(r) +
          " outside [0,1]");
    r = std::clamp(r, 0.0, 1.0);
  }

  const int m = scene.class_count;
  std::vector<int> noisy = scene.labels;
  Rng rng(seed);
  for (const Instance& inst : instances) {
    if (partner[inst.label] >= 0) {
      if (rng.uniform() < tau_pair) overwrite(noisy, inst, partner[inst.label]);
    } else {
      if (rng.uniform() < r) {
        int pick = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m - 1)));
        if (pick >= inst.label) ++pick;
        overwrite(noisy, inst, pick);
      }
    }
  }
  return noisy;
}

namespace {

double point_distance(const Scene& scene, int a, int b) {
  const Vec3& pa = scene.positions[a];
  const Vec3& pb = scene.positions[b];
  return std::sqrt((pa[0] - pb[0]) * (pa[0] - pb[0]) + (pa[1] - pb[1]) * (pa[1] - pb[1]) +
                   (pa[2] - pb[2]) * (pa[2] - pb[2]));
}

// marks[p]: 1 when p is within the 80-NN of a boundary point, 2 when some
// different-class boundary point can flip p with positive probability
std::vector<char> boundary_marks(const Scene& scene) {
  if (!scene.has_labels()) throw std::invalid_argument("boundary noise: scene has no labels");
  const int n = scene.size();
  const int k = std::min(80, n);
  SpatialIndex index(scene);
  std::vector<char> marks(n, 0);
  std::vector<double> dist(k);
  for (int p = 0; p < n; ++p) {
    const auto nn = index.knn(p, k);
    bool boundary = false;
    for (int q : nn)
      if (scene.labels[q] != scene.labels[p]) {
        boundary = true;
        break;
      }
    if (!boundary) continue;
    double davg = 0.0;
    for (int j = 0; j < k; ++j) davg += (dist[j] = point_distance(scene, p, nn[j]));
    davg /= k;
    for (int j = 0; j < k; ++j) {
      marks[nn[j]] = std::max<char>(marks[nn[j]], 1);
      const bool cross = scene.labels[nn[j]] != scene.labels[p];
      const bool reachable = davg <= 0.0 || dist[j] < 2.0 * davg;
      if (cross && reachable) marks[nn[j]] = 2;
    }
  }
  return marks;
}

std::vector<int> collect_marked(const std::vector<char>& marks, char at_least) {
  std::vector<int> out;
  for (std::size_t p = 0; p < marks.size(); ++p)
    if (marks[p] >= at_least) out.push_back(static_cast<int>(p));
  return out;
}

}  // namespace

std::vector<int> boundary_band_80(const Scene& scene) {
  return collect_marked(boundary_marks(scene), 1);
}

std::vector<int> boundary_corruptible_set(const Scene& scene) {
  return collect_marked(boundary_marks(scene), 2);
}

std::vector<int> inject_boundary(const Scene& scene, double beta, std::uint64_t seed) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("inject_boundary: beta outside [0,1]");
  if (!scene.has_labels()) throw std::invalid_argument("inject_boundary: scene has no labels");
  std::vector<int> noisy = scene.labels;
  if (beta == 0.0) return noisy;

  const std::vector<int> corruptible = boundary_corruptible_set(scene);
  if (corruptible.empty())
    throw std::invalid_argument("inject_boundary: no label boundary in scene");
  const double threshold = beta * static_cast<double>(corruptible.size());

  const int n = scene.size();
  const int k = std::min(80, n);
  SpatialIndex index(scene);

  std::vector<int> classes;
  {
    std::set<int> uniq(scene.labels.begin(), scene.labels.end());
    classes.assign(uniq.begin(), uniq.end());
  }
  std::vector<std::vector<int>> points_of_class(scene.class_count);
  for (int p = 0; p < n; ++p) points_of_class[scene.labels[p]].push_back(p);

  Rng rng(seed);
  long flipped = 0;
  long best = 0;
  long fruitless = 0;
  const long fruitless_limit = 1000 + 200L * n;
  while (static_cast<double>(flipped) < threshold) {
    if (++fruitless > fruitless_limit)
      throw std::runtime_error("inject_boundary: no progress; scene has no usable boundary");
    const int y = classes[rng.uniform_int(classes.size())];
    const auto& candidates = points_of_class[y];
    const int i = candidates[rng.uniform_int(candidates.size())];
    const auto nn = index.knn(i, k);
    bool at_boundary = false;
    for (int q : nn)
      if (scene.labels[q] != scene.labels[i]) {
        at_boundary = true;
        break;
      }
    if (!at_boundary) continue;

    double davg = 0.0;
    std::vector<double> dist(nn.size());
    for (std::size_t j = 0; j < nn.size(); ++j) davg += (dist[j] = point_distance(scene, i, nn[j]));
    davg /= static_cast<double>(nn.size());

    // Closer neighbors are more likely to flip: a linear ramp anchored at
    // twice the average neighbor distance, scaled by beta. Writes are
    // cross-class only so already-noisy points never flip back clean and the
    // loop guard count is monotone.
    for (std::size_t j = 0; j < nn.size(); ++j) {
      const double ramp = davg > 0.0 ? std::clamp(1.0 - dist[j] / (2.0 * davg), 0.0, 1.0) : 1.0;
      if (rng.uniform() < beta * ramp) {
        const int q = nn[j];
        if (scene.labels[q] == scene.labels[i]) continue;
        if (noisy[q] == scene.labels[q]) ++flipped;
        noisy[q] = scene.labels[i];
      }
    }
    if (flipped > best) {
      best = flipped;
      fruitless = 0;
    }
  }
  return noisy;
}

DatasetBoundaryResult inject_dataset_boundary(const std::vector<Scene>& scenes, double alpha,
                                              double beta, std::uint64_t seed) {
  if (scenes.empty()) throw std::invalid_argument("inject_dataset_boundary: empty scene list");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("inject_dataset_boundary: alpha outside [0,1]");
  const int s = static_cast<int>(scenes.size());
  const int chosen = static_cast<int>(std::llround(alpha * s));

  // seeded choice without replacement
  std::vector<int> order(s);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "scene-choice"));
  for (int i = 0; i < chosen; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(s - i)));
    std::swap(order[i], order[j]);
  }

  DatasetBoundaryResult out;
  out.labels.reserve(s);
  out.modified.assign(s, false);
  for (const Scene& scene : scenes) out.labels.push_back(scene.labels);
  for (int i = 0; i < chosen; ++i) {
    const int idx = order[i];
    const Scene& scene = scenes[idx];
    const std::set<int> uniq(scene.labels.begin(), scene.labels.end());
    if (uniq.size() < 2) continue;  // no boundary to corrupt
    out.labels[idx] = inject_boundary(scene, beta, derive_seed(seed, "boundary-scene", idx));
    out.modified[idx] = true;
  }
  return out;
}

double measured_instance_rate(const Scene& scene, const std::vector<int>& noisy_labels) {
  const auto instances = collect_instances(scene);
  long flipped = 0;
  for (const Instance& inst : instances)
    if (noisy_labels[inst.points.front()] != inst.label) ++flipped;
  return static_cast<double>(flipped) / static_cast<double>(instances.size());
}

NoiseReport make_instance_report(const Scene& scene, const std::vector<int>& noisy,
                                 double requested) {
  NoiseReport report;
  report.requested_rate = requested;
  report.measured_rate = measured_instance_rate(scene, noisy);
  for (int p = 0; p < scene.size(); ++p)
    if (noisy[p] != scene.labels[p]) ++report.flipped_points;
  return report;
}

NoiseReport make_boundary_report(const Scene& scene, const std::vector<int>& noisy,
                                 double requested) {
  NoiseReport report;
  report.requested_rate = requested;
  for (int p = 0; p < scene.size(); ++p)
    if (noisy[p] != scene.labels[p]) ++report.flipped_points;
  const auto corruptible = boundary_corruptible_set(scene);
  report.measured_rate = corruptible.empty()
                             ? 0.0
                             : static_cast<double>(report.flipped_points) /
                                   static_cast<double>(corruptible.size());
  return report;
}

}  // namespace pnal
