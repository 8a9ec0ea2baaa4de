#include "pnal/scene.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "pnal/errors.hpp"

namespace pnal {

void Scene::validate() const {
  const std::size_t n = positions.size();
  if (n == 0) throw std::invalid_argument("scene: no points");
  if (colors.size() != n) throw std::invalid_argument("scene: color count != point count");
  if (!labels.empty() && labels.size() != n)
    throw std::invalid_argument("scene: label count != point count");
  if (!instance_ids.empty() && instance_ids.size() != n)
    throw std::invalid_argument("scene: instance count != point count");
  if (has_labels()) {
    if (class_count < 2) throw std::invalid_argument("scene: class_count must be >= 2");
    for (int l : labels)
      if (l < 0 || l >= class_count) throw std::invalid_argument("scene: label id out of range");
  }
  for (const Vec3& c : colors)
    for (double v : c)
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("scene: color outside [0,1]");
}

void Scene::bounds(Vec3& lo, Vec3& hi) const {
  lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
        std::numeric_limits<double>::max()};
  hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
        std::numeric_limits<double>::lowest()};
  for (const Vec3& p : positions)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
}

Scene load_scene(std::istream& in, int class_count) {
  Scene scene;
  std::string line;
  int columns = -1;
  double max_color = 0.0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y, z, r, g, b;
    if (!(ls >> x >> y >> z >> r >> g >> b))
      throw IoError("scene line " + std::to_string(line_no) + ": expected x y z r g b");
    long label = -1, instance = -1;
    int cols = 6;
    if (ls >> label) {
      cols = 7;
      if (ls >> instance) cols = 8;
    }
    if (columns == -1) columns = cols;
    if (columns != cols)
      throw IoError("scene line " + std::to_string(line_no) + ": inconsistent column count");
    scene.positions.push_back({x, y, z});
    scene.colors.push_back({r, g, b});
    max_color = std::max({max_color, r, g, b});
    if (cols >= 7) scene.labels.push_back(static_cast<int>(label));
    if (cols == 8) scene.instance_ids.push_back(static_cast<int>(instance));
  }
  if (scene.positions.empty()) throw IoError("scene: no points in input");
  if (max_color > 1.0) {
    for (Vec3& c : scene.colors)
      for (double& v : c) v = std::clamp(v / 255.0, 0.0, 1.0);
  }
  if (scene.has_labels()) {
    if (class_count > 0) {
      scene.class_count = class_count;
    } else {
      int max_label = 0;
      for (int l : scene.labels) max_label = std::max(max_label, l);
      scene.class_count = std::max(2, max_label + 1);
    }
  }
  scene.validate();
  return scene;
}

Scene load_scene(const std::string& path, int class_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file: " + path);
  try {
    return load_scene(in, class_count);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_scene(std::ostream& out, const Scene& scene) {
  scene.validate();
  char buf[256];
  for (int i = 0; i < scene.size(); ++i) {
    const Vec3& p = scene.positions[i];
    const Vec3& c = scene.colors[i];
    int n = std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %.6f %.6f %.6f", p[0], p[1], p[2],
                          c[0], c[1], c[2]);
    out.write(buf, n);
    if (scene.has_labels()) {
      n = std::snprintf(buf, sizeof(buf), " %d", scene.labels[i]);
      out.write(buf, n);
      if (scene.has_instances()) {
        n = std::snprintf(buf, sizeof(buf), " %d", scene.instance_ids[i]);
        out.write(buf, n);
      }
    }
    out.put('\n');
  }
}

void save_scene(const std::string& path, const Scene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scene file: " + path);
  save_scene(out, scene);
  if (!out) throw IoError("error while writing scene file: " + path);
}

}  // namespace pnal
