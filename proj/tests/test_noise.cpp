#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "pnal/noise.hpp"
#include "pnal/rng.hpp"
#include "pnal/synthgen.hpp"

using namespace pnal;

namespace {

// A catalog of single-point instances: instance-level behavior reduces to
// per-point behavior, which keeps rate checks cheap.
Scene instance_catalog(int instances, int class_count, std::uint64_t seed) {
  Rng rng(seed);
  Scene s;
  s.class_count = class_count;
  for (int i = 0; i < instances; ++i) {
    s.positions.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    s.colors.push_back({0.5, 0.5, 0.5});
    s.labels.push_back(i % class_count);
    s.instance_ids.push_back(i);
  }
  return s;
}

// two half-spaces meeting at a plane
Scene plane_contact_scene(int per_side, std::uint64_t seed) {
  Rng rng(seed);
  Scene s;
  s.class_count = 2;
  for (int side = 0; side < 2; ++side)
    for (int i = 0; i < per_side; ++i) {
      const double x = side == 0 ? -rng.uniform() : rng.uniform();
      s.positions.push_back({x, rng.uniform() * 2.0, rng.uniform() * 2.0});
      s.colors.push_back({0.5 * side, 0.5, 0.5});
      s.labels.push_back(side);
      s.instance_ids.push_back(side);
    }
  return s;
}

double binomial_99_halfwidth(double rate, int n) {
  return 2.576 * std::sqrt(rate * (1.0 - rate) / n);
}

}  // namespace

TEST_CASE("symmetric: tau 0 and tau 1 extremes") {
  const Scene s = instance_catalog(120, 6, 1);
  CHECK(inject_symmetric(s, 0.0, 7) == s.labels);
  const auto all = inject_symmetric(s, 1.0, 7);
  for (int i = 0; i < s.size(); ++i) CHECK(all[i] != s.labels[i]);
}

TEST_CASE("symmetric: measured rate within the 99% binomial interval") {
  const Scene s = instance_catalog(500, 6, 2);
  const auto noisy = inject_symmetric(s, 0.4, 11);
  const double rate = measured_instance_rate(s, noisy);
  const double hw = binomial_99_halfwidth(0.4, 500);
  CHECK(rate > 0.4 - hw);
  CHECK(rate < 0.4 + hw);
}

TEST_CASE("symmetric noise never splits an instance") {
  SynthSpec spec;
  spec.seed = 3;
  const Scene s = generate_scene(spec);
  const auto noisy = inject_symmetric(s, 0.6, 13);
  std::map<int, int> first;
  for (int p = 0; p < s.size(); ++p) {
    auto it = first.try_emplace(s.instance_ids[p], noisy[p]).first;
    CHECK(it->second == noisy[p]);
  }
}

TEST_CASE("symmetric requires instance ids") {
  Scene s;
  s.positions.push_back({0, 0, 0});
  s.colors.push_back({0, 0, 0});
  s.labels.push_back(0);
  s.class_count = 2;
  CHECK_THROWS_AS(inject_symmetric(s, 0.5, 1), std::invalid_argument);
}

TEST_CASE("asymmetric pairs: unpaired classes never move, tau_pair=1 swaps") {
  const Scene s = instance_catalog(240, 6, 4);
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {2, 3}};
  const auto noisy = inject_asymmetric_pairs(s, 1.0, pairs, 5);
  for (int i = 0; i < s.size(); ++i) {
    switch (s.labels[i]) {
      case 0: CHECK(noisy[i] == 1); break;
      case 1: CHECK(noisy[i] == 0); break;
      case 2: CHECK(noisy[i] == 3); break;
      case 3: CHECK(noisy[i] == 2); break;
      default: CHECK(noisy[i] == s.labels[i]);
    }
  }
}

TEST_CASE("asymmetric pairs: flip fraction within the binomial interval") {
  const Scene s = instance_catalog(1000, 2, 6);  // every instance paired
  const auto noisy = inject_asymmetric_pairs(s, 0.4, {{0, 1}}, 7);
  const double rate = measured_instance_rate(s, noisy);
  const double hw = binomial_99_halfwidth(0.4, 1000);
  CHECK(rate > 0.4 - hw);
  CHECK(rate < 0.4 + hw);
}

TEST_CASE("overlapping pairs are rejected") {
  const Scene s = instance_catalog(10, 6, 8);
  CHECK_THROWS_AS(inject_asymmetric_pairs(s, 0.5, {{0, 1}, {1, 2}}, 1), std::invalid_argument);
}

TEST_CASE("mixed asymmetric: degenerate cases") {
  const Scene s = instance_catalog(200, 6, 9);
  // no pairs, tau_pair 0: reduces to symmetric at tau
  const auto a = inject_mixed_asymmetric(s, 0.3, 0.0, {}, 17);
  const double hw = binomial_99_halfwidth(0.3, 200);
  CHECK(measured_instance_rate(s, a) > 0.3 - hw);
  CHECK(measured_instance_rate(s, a) < 0.3 + hw);

  // all classes paired and tau == tau_pair: the symmetric mechanism never fires
  const Scene two = instance_catalog(100, 2, 10);
  const auto b = inject_mixed_asymmetric(two, 0.4, 0.4, {{0, 1}}, 18);
  for (int i = 0; i < two.size(); ++i)
    CHECK((b[i] == two.labels[i] || b[i] == 1 - two.labels[i]));
}

TEST_CASE("mixed asymmetric: overall rate matches tau") {
  // 6 classes, pairs cover 0-3 (two thirds of instances), tau solved over the rest
  const Scene s = instance_catalog(900, 6, 11);
  const auto noisy = inject_mixed_asymmetric(s, 0.6, 0.4, {{0, 1}, {2, 3}}, 19);
  const double rate = measured_instance_rate(s, noisy);
  const double hw = binomial_99_halfwidth(0.6, 900);
  CHECK(rate > 0.6 - hw);
  CHECK(rate < 0.6 + hw);
}

TEST_CASE("mixed asymmetric: infeasible combination names the implied rate") {
  const Scene s = instance_catalog(100, 6, 12);
  // paired third at 0, required overall 0.9 -> unpaired rate > 1
  CHECK_THROWS_WITH_AS(inject_mixed_asymmetric(s, 0.95, 0.0, {{0, 1}, {2, 3}}, 1),
                       doctest::Contains("outside [0,1]"), std::invalid_argument);
}

TEST_CASE("boundary: beta 0 leaves labels unchanged") {
  const Scene s = plane_contact_scene(300, 13);
  CHECK(inject_boundary(s, 0.0, 3) == s.labels);
}

TEST_CASE("boundary: flips stay within the 80-NN band and respect the exit bound") {
  const Scene s = plane_contact_scene(400, 14);
  const auto band = boundary_band_80(s);
  const auto corruptible = boundary_corruptible_set(s);
  REQUIRE_FALSE(band.empty());
  REQUIRE_FALSE(corruptible.empty());
  CHECK(corruptible.size() <= band.size());
  const std::set<int> band_set(band.begin(), band.end());
  for (int beta_idx : {0, 1}) {
    const double beta = beta_idx == 0 ? 0.5 : 0.7;
    const auto noisy = inject_boundary(s, beta, 21);
    long flipped = 0;
    for (int p = 0; p < s.size(); ++p) {
      if (noisy[p] != s.labels[p]) {
        ++flipped;
        CHECK(band_set.count(p) == 1);
      }
    }
    const double threshold = beta * static_cast<double>(corruptible.size());
    CHECK(static_cast<double>(flipped) >= threshold);
    CHECK(static_cast<double>(flipped) <= threshold + 80.0);
  }
}

TEST_CASE("boundary: single-class scene errors") {
  Scene s;
  s.class_count = 2;
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    s.positions.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    s.colors.push_back({0.5, 0.5, 0.5});
    s.labels.push_back(0);
    s.instance_ids.push_back(0);
  }
  CHECK_THROWS_AS(inject_boundary(s, 0.5, 1), std::invalid_argument);
}

TEST_CASE("dataset boundary: alpha selects exactly round(alpha * n) scenes") {
  std::vector<Scene> scenes;
  for (int i = 0; i < 10; ++i) scenes.push_back(plane_contact_scene(150, 20 + i));

  const auto none = inject_dataset_boundary(scenes, 0.0, 0.5, 3);
  for (int i = 0; i < 10; ++i) {
    CHECK_FALSE(none.modified[i]);
    CHECK(none.labels[i] == scenes[i].labels);
  }

  const auto half = inject_dataset_boundary(scenes, 0.5, 0.5, 3);
  int modified = 0;
  for (bool m : half.modified) modified += m;
  CHECK(modified == 5);

  const auto all = inject_dataset_boundary(scenes, 1.0, 0.5, 3);
  for (int i = 0; i < 10; ++i) CHECK(all.modified[i]);
}

TEST_CASE("injectors are pure functions of scene, spec and seed") {
  const Scene s = instance_catalog(300, 6, 16);
  CHECK(inject_symmetric(s, 0.4, 5) == inject_symmetric(s, 0.4, 5));
  CHECK(inject_symmetric(s, 0.4, 5) != inject_symmetric(s, 0.4, 6));
  const Scene p = plane_contact_scene(200, 17);
  CHECK(inject_boundary(p, 0.4, 5) == inject_boundary(p, 0.4, 5));
}

TEST_CASE("noise spec validation") {
  NoiseSpec spec;
  spec.tau = 1.5;
  CHECK_THROWS_AS(spec.validate(6), std::invalid_argument);
  spec.tau = 0.5;
  spec.pairs = {{0, 7}};
  CHECK_THROWS_AS(spec.validate(6), std::invalid_argument);
  spec.pairs = {{0, 1}};
  CHECK_NOTHROW(spec.validate(6));
}
