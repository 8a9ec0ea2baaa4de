#include "pnal/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnal/rng.hpp"

namespace pnal {

namespace {

Vec3 class_base_color(int c, int class_count) {
  // Hues spread evenly around the wheel, fixed saturation/value.
  const double h = 6.0 * static_cast<double>(c) / static_cast<double>(class_count);
  const double s = 0.85, v = 0.8;
  const int i = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

struct Face {
  Vec3 origin;
  Vec3 u;  // first edge vector
  Vec3 v;  // second edge vector
  double area;
};

Vec3 clamp01(Vec3 c) {
  for (double& x : c) x = std::clamp(x, 0.0, 1.0);
  return c;
}

void emit_instance(Scene& scene, const std::vector<Face>& faces, int label, int instance_id,
                   int points, const Vec3& base_color, double point_noise, Rng& rng) {
  double total = 0.0;
  for (const Face& f : faces) total += f.area;
  for (int i = 0; i < points; ++i) {
    // area-weighted face choice, then uniform within the face
    double pick = rng.uniform() * total;
    std::size_t fi = 0;
    while (fi + 1 < faces.size() && pick > faces[fi].area) {
      pick -= faces[fi].area;
      ++fi;
    }
    const Face& f = faces[fi];
    const double a = rng.uniform();
    const double b = rng.uniform();
    Vec3 p;
    for (int d = 0; d < 3; ++d) p[d] = f.origin[d] + a * f.u[d] + b * f.v[d];
    Vec3 c = base_color;
    for (double& x : c) x += point_noise * rng.normal();
    scene.positions.push_back(p);
    scene.colors.push_back(clamp01(c));
    scene.labels.push_back(label);
    scene.instance_ids.push_back(instance_id);
  }
}

std::vector<Face> box_faces(const Vec3& lo, const Vec3& size) {
  // top + four sides; the bottom is never scanned
  std::vector<Face> faces;
  const auto [w, d, h] = std::array{size[0], size[1], size[2]};
  faces.push_back({{lo[0], lo[1], lo[2] + h}, {w, 0, 0}, {0, d, 0}, w * d});          // top
  faces.push_back({{lo[0], lo[1], lo[2]}, {w, 0, 0}, {0, 0, h}, w * h});              // front
  faces.push_back({{lo[0], lo[1] + d, lo[2]}, {w, 0, 0}, {0, 0, h}, w * h});          // back
  faces.push_back({{lo[0], lo[1], lo[2]}, {0, d, 0}, {0, 0, h}, d * h});              // left
  faces.push_back({{lo[0] + w, lo[1], lo[2]}, {0, d, 0}, {0, 0, h}, d * h});          // right
  return faces;
}

}  // namespace

void SynthSpec::validate() const {
  if (class_count < 2) throw std::invalid_argument("synth spec: class_count must be >= 2");
  if (instances_per_class < 1)
    throw std::invalid_argument("synth spec: instances_per_class must be >= 1");
  if (points_per_instance < 1)
    throw std::invalid_argument("synth spec: points_per_instance must be >= 1");
  if (color_noise < 0.0) throw std::invalid_argument("synth spec: color_noise must be >= 0");
  for (double e : room)
    if (e <= 0.0) throw std::invalid_argument("synth spec: room extents must be positive");
}

Scene generate_scene(const SynthSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "synth-scene"));

  const int m = spec.class_count;
  const int box_count = (m - 1) * spec.instances_per_class;
  const double margin = 0.05;
  const double gap = spec.contact ? 0.0 : 0.18;
  const double z_base = spec.contact ? 0.0 : 0.35;

  // Box extents jittered per instance; classes interleave along each row so
  // adjacent boxes usually differ in class.
  struct Box {
    Vec3 lo, size;
    int label, instance;
  };
  std::vector<Box> boxes;
  boxes.reserve(box_count);
  int instance_id = 0;
  double cx = margin, cy = margin, row_depth = 0.0;
  for (int i = 0; i < box_count; ++i) {
    const int label = 1 + i % (m - 1);
    const double w = 0.26 + 0.10 * rng.uniform();
    const double d = 0.26 + 0.10 * rng.uniform();
    const double h = 0.22 + 0.20 * rng.uniform();
    if (cx + w > spec.room[0] - margin) {  // start a new row
      cx = margin;
      cy += row_depth + std::max(gap, 0.12);
      row_depth = 0.0;
    }
    if (cy + d > spec.room[1] - margin || z_base + h > spec.room[2])
      throw std::invalid_argument("generate_scene: instances do not fit the room");
    boxes.push_back({{cx, cy, z_base}, {w, d, h}, label, instance_id++});
    cx += w + gap;
    row_depth = std::max(row_depth, d);
  }
  const double used_x = spec.room[0] - 2.0 * margin;
  const double used_y = cy + row_depth + margin <= spec.room[1] ? cy + row_depth : spec.room[1];

  Scene scene;
  scene.class_count = m;
  const int total_points = m * spec.instances_per_class * spec.points_per_instance;
  scene.positions.reserve(total_points);
  scene.colors.reserve(total_points);
  scene.labels.reserve(total_points);
  scene.instance_ids.reserve(total_points);

  // color_noise mostly moves whole instances; the per-point jitter stays
  // small so one instance remains a dense region in the clustering feature
  const double point_noise = std::min(spec.color_noise * 0.2, 0.005);

  // Floor: instances_per_class strips at z = 0 spanning the used footprint.
  for (int t = 0; t < spec.instances_per_class; ++t) {
    const double w = used_x / spec.instances_per_class;
    Face strip{{margin + t * w, margin * 0.5, 0.0}, {w, 0, 0}, {0, used_y, 0}, w * used_y};
    Vec3 base = class_base_color(0, m);
    for (double& x : base) x += spec.color_noise * rng.normal();
    emit_instance(scene, {strip}, 0, instance_id++, spec.points_per_instance, clamp01(base),
                  point_noise, rng);
  }

  for (const Box& box : boxes) {
    Vec3 base = class_base_color(box.label, m);
    for (double& x : base) x += spec.color_noise * rng.normal();
    emit_instance(scene, box_faces(box.lo, box.size), box.label, box.instance,
                  spec.points_per_instance, clamp01(base), point_noise, rng);
  }

  scene.validate();
  return scene;
}

std::vector<Scene> generate_dataset(const SynthSpec& spec, int scene_count, std::uint64_t seed) {
  if (scene_count < 1) throw std::invalid_argument("generate_dataset: scene_count must be >= 1");
  std::vector<Scene> scenes;
  scenes.reserve(scene_count);
  for (int i = 0; i < scene_count; ++i) {
    SynthSpec s = spec;
    s.seed = derive_seed(seed, "synth-dataset", static_cast<std::uint64_t>(i));
    scenes.push_back(generate_scene(s));
  }
  return scenes;
}

}  // namespace pnal
