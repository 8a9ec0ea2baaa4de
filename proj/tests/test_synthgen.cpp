#include <chrono>
#include <map>
#include <set>

#include "doctest.h"
#include "pnal/boundary.hpp"
#include "pnal/spatial_index.hpp"
#include "pnal/synthgen.hpp"

using namespace pnal;

TEST_CASE("two-class spec: one floor and one box in contact") {
  SynthSpec spec;
  spec.class_count = 2;
  spec.instances_per_class = 1;
  spec.points_per_instance = 300;
  spec.seed = 4;
  const Scene s = generate_scene(spec);
  CHECK(s.size() == 600);
  CHECK(std::set<int>(s.labels.begin(), s.labels.end()) == std::set<int>{0, 1});
  CHECK(std::set<int>(s.instance_ids.begin(), s.instance_ids.end()).size() == 2);
  // the box touches the floor: some box point sits near z = 0
  double min_box_z = 1e9;
  for (int p = 0; p < s.size(); ++p)
    if (s.labels[p] == 1) min_box_z = std::min(min_box_z, s.positions[p][2]);
  CHECK(min_box_z < 0.05);
}

TEST_CASE("same spec and seed produce bitwise-identical scenes") {
  SynthSpec spec;
  spec.seed = 9;
  const Scene a = generate_scene(spec);
  const Scene b = generate_scene(spec);
  CHECK(a.positions == b.positions);
  CHECK(a.colors == b.colors);
  CHECK(a.labels == b.labels);
  CHECK(a.instance_ids == b.instance_ids);
}

TEST_CASE("label histogram is exactly instances x points per class") {
  SynthSpec spec;
  spec.class_count = 6;
  spec.instances_per_class = 5;
  spec.points_per_instance = 400;
  spec.room = {4.5, 4.5, 1.2};
  spec.seed = 5;
  const Scene s = generate_scene(spec);
  CHECK(s.size() == 12000);
  std::map<int, int> histogram;
  for (int l : s.labels) ++histogram[l];
  for (int c = 0; c < 6; ++c) CHECK(histogram[c] == 2000);
}

TEST_CASE("instances are single-class") {
  SynthSpec spec;
  spec.seed = 6;
  const Scene s = generate_scene(spec);
  std::map<int, int> label_of;
  for (int p = 0; p < s.size(); ++p) {
    auto it = label_of.try_emplace(s.instance_ids[p], s.labels[p]).first;
    CHECK(it->second == s.labels[p]);
  }
}

TEST_CASE("contact layout yields true boundary points at k = 20") {
  SynthSpec spec;
  spec.seed = 7;
  spec.contact = true;
  const Scene s = generate_scene(spec);
  SpatialIndex index(s);
  const BoundaryBand band = extract_boundary(s.labels, index, 20);
  CHECK_FALSE(band.members.empty());
}

TEST_CASE("infeasible packing is rejected") {
  SynthSpec spec;
  spec.room = {0.6, 0.6, 1.0};
  spec.class_count = 8;
  spec.instances_per_class = 6;
  CHECK_THROWS_AS(generate_scene(spec), std::invalid_argument);
}

TEST_CASE("50 default scenes generate quickly") {
  const auto start = std::chrono::steady_clock::now();
  const auto scenes = generate_dataset(SynthSpec{}, 50, 8);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(scenes.size() == 50);
  CHECK(seconds < 10.0);
}

TEST_CASE("dataset scenes differ pairwise and are deterministic") {
  SynthSpec spec;
  spec.points_per_instance = 50;
  const auto a = generate_dataset(spec, 3, 11);
  const auto b = generate_dataset(spec, 3, 11);
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(a[i].positions == b[i].positions);
  CHECK(a[0].positions != a[1].positions);
  CHECK(a[1].positions != a[2].positions);
  CHECK_THROWS_AS(generate_dataset(spec, 0, 1), std::invalid_argument);
}
