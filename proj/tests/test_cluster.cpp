#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pnal/cluster.hpp"
#include "pnal/rng.hpp"

using namespace pnal;

namespace {

void add_blob(Scene& s, Vec3 center, Vec3 color, int count, double spread, Rng& rng) {
  for (int i = 0; i < count; ++i) {
    Vec3 p = center;
    for (int a = 0; a < 3; ++a) p[a] += spread * (rng.uniform() - 0.5);
    s.positions.push_back(p);
    s.colors.push_back(color);
  }
}

// Reference density clustering: exhaustive neighbor scan over the same 6-d
// feature, independent of the kd-tree implementation.
std::vector<int> brute_dbscan(const Scene& scene, double eps, int min_pts) {
  const int n = scene.size();
  Vec3 lo, hi;
  scene.bounds(lo, hi);
  double scale = 0.0;
  for (int a = 0; a < 3; ++a) scale = std::max(scale, hi[a] - lo[a]);
  if (scale <= 0) scale = 1.0;
  auto feature = [&](int i, int d) -> double {
    return d < 3 ? (scene.positions[i][d] - lo[d]) / scale : scene.colors[i][d - 3];
  };
  auto neighbors = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (int d = 0; d < 6; ++d) {
        const double diff = feature(i, d) - feature(j, d);
        acc += diff * diff;
      }
      if (acc <= eps * eps) out.push_back(j);
    }
    return out;
  };
  std::vector<int> label(n, -2);
  int next = 0;
  for (int p = 0; p < n; ++p) {
    if (label[p] != -2) continue;
    auto nb = neighbors(p);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[p] = -1;
      continue;
    }
    const int cid = next++;
    label[p] = cid;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const int q = nb[i];
      if (label[q] == -1) label[q] = cid;
      if (label[q] != -2) continue;
      label[q] = cid;
      auto nq = neighbors(q);
      if (static_cast<int>(nq.size()) >= min_pts) nb.insert(nb.end(), nq.begin(), nq.end());
    }
  }
  for (int p = 0; p < n; ++p)
    if (label[p] == -1) label[p] = next++;
  return label;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto f = fwd.try_emplace(a[i], b[i]);
    if (!f.second && f.first->second != b[i]) return false;
    auto g = bwd.try_emplace(b[i], a[i]);
    if (!g.second && g.first->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("two well separated blobs make two clusters") {
  Rng rng(5);
  Scene s;
  add_blob(s, {0, 0, 0}, {0.5, 0.5, 0.5}, 60, 0.05, rng);
  add_blob(s, {1, 0, 0}, {0.5, 0.5, 0.5}, 60, 0.05, rng);
  const ClusterSet cs = dbscan_cluster(s, 0.05, 5);
  cs.validate();
  CHECK(cs.count() == 2);
  CHECK(cs.cluster_of[0] != cs.cluster_of[60]);
}

TEST_CASE("color gap alone separates a single spatial blob") {
  Rng rng(6);
  Scene s;
  // one dense blob, half red half blue; the far anchors fix the scene extent
  // so the blob stays dense after unit-cube scaling
  add_blob(s, {0, 0, 0}, {0.9, 0.1, 0.1}, 80, 0.04, rng);
  add_blob(s, {0, 0, 0}, {0.1, 0.1, 0.9}, 80, 0.04, rng);
  s.positions.push_back({2, 2, 1});
  s.colors.push_back({0.5, 0.5, 0.5});
  s.positions.push_back({-2, -2, -1});
  s.colors.push_back({0.5, 0.5, 0.5});
  const ClusterSet cs = dbscan_cluster(s, 0.06, 5);
  cs.validate();
  // verify against the reference oracle
  CHECK(same_partition(cs.cluster_of, brute_dbscan(s, 0.06, 5)));
  std::set<int> red, blue;
  for (int i = 0; i < 80; ++i) red.insert(cs.cluster_of[i]);
  for (int i = 80; i < 160; ++i) blue.insert(cs.cluster_of[i]);
  CHECK(red.size() == 1);
  CHECK(blue.size() == 1);
  CHECK(*red.begin() != *blue.begin());
  // the anchors are isolated noise points, converted into singletons
  CHECK(cs.members[cs.cluster_of[160]].size() == 1);
  CHECK(cs.members[cs.cluster_of[161]].size() == 1);
}

TEST_CASE("an isolated point becomes a singleton cluster") {
  Rng rng(7);
  Scene s;
  add_blob(s, {0, 0, 0}, {0.5, 0.5, 0.5}, 50, 0.05, rng);
  s.positions.push_back({3, 3, 3});
  s.colors.push_back({0.5, 0.5, 0.5});
  const ClusterSet cs = dbscan_cluster(s, 0.05, 5);
  cs.validate();
  const int singleton = cs.cluster_of[50];
  CHECK(cs.members[singleton].size() == 1);
}

TEST_CASE("dbscan matches the exhaustive oracle on random mixtures") {
  Rng rng(8);
  Scene s;
  for (int b = 0; b < 6; ++b)
    add_blob(s, {0.3 * b, 0.1 * (b % 2), 0}, {0.15 * b, 0.5, 1.0 - 0.15 * b}, 40, 0.06, rng);
  for (double eps : {0.02, 0.05, 0.1})
    CHECK(same_partition(dbscan_cluster(s, eps, 6).cluster_of, brute_dbscan(s, eps, 6)));
}

TEST_CASE("partition property holds") {
  Rng rng(9);
  Scene s;
  add_blob(s, {0, 0, 0}, {0.2, 0.8, 0.2}, 120, 0.3, rng);
  const ClusterSet cs = dbscan_cluster(s, 0.03, 4);
  cs.validate();
  std::size_t total = 0;
  for (int c = 0; c < cs.count(); ++c) total += cs.members[c].size();
  CHECK(total == static_cast<std::size_t>(s.size()));
}

TEST_CASE("growing eps never increases non-singleton component count on dense blobs") {
  Rng rng(10);
  Scene s;
  for (int b = 0; b < 4; ++b) add_blob(s, {0.4 * b, 0, 0}, {0.5, 0.5, 0.5}, 80, 0.06, rng);
  int previous = 1 << 20;
  for (double eps : {0.03, 0.06, 0.12, 0.3}) {
    const ClusterSet cs = dbscan_cluster(s, eps, 5);
    int non_singleton = 0;
    for (int c = 0; c < cs.count(); ++c)
      if (cs.members[c].size() > 1) ++non_singleton;
    CHECK(non_singleton <= previous);
    previous = non_singleton;
  }
}

TEST_CASE("instance clusters mirror instance ids") {
  Scene s;
  for (int i = 0; i < 9; ++i) {
    s.positions.push_back({static_cast<double>(i), 0, 0});
    s.colors.push_back({0.5, 0.5, 0.5});
    s.instance_ids.push_back(i % 3 + 100);
  }
  const ClusterSet cs = clusters_from_instances(s);
  cs.validate();
  CHECK(cs.count() == 3);
  CHECK(cs.cluster_of[0] == cs.cluster_of[3]);
  CHECK(cs.cluster_of[0] != cs.cluster_of[1]);
}

TEST_CASE("cluster dump round trip") {
  Scene s;
  for (int i = 0; i < 12; ++i) {
    s.positions.push_back({static_cast<double>(i % 4), static_cast<double>(i / 4), 0});
    s.colors.push_back({0, 0, 0});
    s.instance_ids.push_back(i % 4);
  }
  const ClusterSet cs = clusters_from_instances(s);
  std::ostringstream out;
  write_cluster_dump(out, cs);
  std::istringstream in(out.str());
  const ClusterSet back = read_cluster_dump(in);
  CHECK(back.cluster_of == cs.cluster_of);
}

TEST_CASE("cluster_members validates the id") {
  Scene s;
  s.positions.push_back({0, 0, 0});
  s.colors.push_back({0, 0, 0});
  s.instance_ids.push_back(4);
  const ClusterSet cs = clusters_from_instances(s);
  CHECK(cs.cluster_members(0).size() == 1);
  CHECK_THROWS_AS(cs.cluster_members(1), std::invalid_argument);
}
