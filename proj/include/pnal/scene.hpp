#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace pnal {

using Vec3 = std::array<double, 3>;

// A point cloud scene: positions in meters, colors in [0,1], optional
// per-point class labels in {0..class_count-1} and instance ids.
struct Scene {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::vector<int> labels;        // empty when absent
  std::vector<int> instance_ids;  // empty when absent
  int class_count = 0;            // M

  int size() const { return static_cast<int>(positions.size()); }
  bool has_labels() const { return !labels.empty(); }
  bool has_instances() const { return !instance_ids.empty(); }

  // Throws std::invalid_argument on any broken invariant: mismatched column
  // lengths, colors outside [0,1], labels outside {0..M-1}, M < 2.
  void validate() const;

  // Axis-aligned bounds of the positions.
  void bounds(Vec3& lo, Vec3& hi) const;
};

// Scene text format: one point per line, `x y z r g b [label] [instance]`,
// `#` starts a comment line. Colors may be 0-255 integers or 0-1 reals; the
// scale is auto-detected from the maximum color value in the file.
//
// class_count 0 means "infer from the label column" (max label + 1, min 2).
Scene load_scene(std::istream& in, int class_count = 0);
Scene load_scene(const std::string& path, int class_count = 0);

// Writes colors as 0-1 reals with six decimals.
void save_scene(std::ostream& out, const Scene& scene);
void save_scene(const std::string& path, const Scene& scene);

}  // namespace pnal
