#include "pnal/cluster.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "pnal/errors.hpp"
#include "pnal/kdtree.hpp"

namespace pnal {

const std::vector<int>& ClusterSet::cluster_members(int cluster_id) const {
  if (cluster_id < 0 || cluster_id >= count())
    throw std::invalid_argument("cluster_members: cluster id out of range");
  return members[cluster_id];
}

void ClusterSet::validate() const {
  std::vector<char> seen(cluster_of.size(), 0);
  for (int c = 0; c < count(); ++c) {
    if (members[c].empty()) throw std::invalid_argument("cluster set: empty cluster");
    for (int p : members[c]) {
      if (p < 0 || p >= static_cast<int>(cluster_of.size()) || seen[p])
        throw std::invalid_argument("cluster set: member lists are not a partition");
      if (cluster_of[p] != c)
        throw std::invalid_argument("cluster set: cluster_of disagrees with members");
      seen[p] = 1;
    }
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("cluster set: uncovered point");
}

namespace {

ClusterSet finalize(std::vector<int> raw, int raw_count) {
  // Canonicalize ids by first occurrence in point order.
  const int n = static_cast<int>(raw.size());
  std::vector<int> remap(raw_count, -1);
  ClusterSet cs;
  cs.cluster_of.assign(n, -1);
  int next = 0;
  for (int p = 0; p < n; ++p) {
    int& m = remap[raw[p]];
    if (m == -1) {
      m = next++;
      cs.members.emplace_back();
    }
    cs.cluster_of[p] = m;
    cs.members[m].push_back(p);
  }
  return cs;
}

}  // namespace

ClusterSet dbscan_cluster(const Scene& scene, double eps, int min_pts) {
  if (scene.size() == 0) throw std::invalid_argument("dbscan: empty scene");
  if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

  const int n = scene.size();
  Vec3 lo, hi;
  scene.bounds(lo, hi);
  // One uniform scale (the largest extent) keeps the geometry isotropic while
  // fitting the positions into the unit cube, so eps means the same thing on
  // every axis.
  double scale = 0.0;
  for (int a = 0; a < 3; ++a) scale = std::max(scale, hi[a] - lo[a]);
  if (scale <= 0.0) scale = 1.0;

  std::vector<double> feat(static_cast<std::size_t>(n) * 6);
  for (int i = 0; i < n; ++i) {
    double* f = feat.data() + static_cast<std::size_t>(i) * 6;
    for (int a = 0; a < 3; ++a) f[a] = (scene.positions[i][a] - lo[a]) / scale;
    for (int a = 0; a < 3; ++a) f[3 + a] = scene.colors[i][a];
  }
  KdTree tree(std::move(feat), 6);

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int next_cluster = 0;
  std::deque<int> frontier;
  for (int p = 0; p < n; ++p) {
    if (label[p] != kUnvisited) continue;
    const std::vector<int> nb = tree.radius(tree.point(p), eps);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[p] = kNoise;
      continue;
    }
    const int cid = next_cluster++;
    label[p] = cid;
    frontier.assign(nb.begin(), nb.end());
    while (!frontier.empty()) {
      const int q = frontier.front();
      frontier.pop_front();
      if (label[q] == kNoise) label[q] = cid;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = cid;
      const std::vector<int> nq = tree.radius(tree.point(q), eps);
      if (static_cast<int>(nq.size()) >= min_pts)
        frontier.insert(frontier.end(), nq.begin(), nq.end());
    }
  }
  // Remaining noise points become singletons so every point stays correctable
  // without importing a neighbor cluster's winner label.
  for (int p = 0; p < n; ++p)
    if (label[p] == kNoise) label[p] = next_cluster++;

  return finalize(std::move(label), next_cluster);
}

ClusterSet clusters_from_instances(const Scene& scene) {
  if (scene.size() == 0) throw std::invalid_argument("instance clusters: empty scene");
  if (!scene.has_instances())
    throw std::invalid_argument("instance clusters: scene has no instance ids");
  std::map<int, int> ids;
  std::vector<int> raw(scene.size());
  for (int p = 0; p < scene.size(); ++p) {
    const auto it = ids.try_emplace(scene.instance_ids[p], static_cast<int>(ids.size())).first;
    raw[p] = it->second;
  }
  return finalize(std::move(raw), static_cast<int>(ids.size()));
}

void write_cluster_dump(std::ostream& out, const ClusterSet& clusters) {
  for (std::size_t p = 0; p < clusters.cluster_of.size(); ++p)
    out << p << ' ' << clusters.cluster_of[p] << '\n';
}

ClusterSet read_cluster_dump(std::istream& in) {
  std::vector<std::pair<long, int>> rows;
  long pid;
  int cid;
  while (in >> pid >> cid) rows.emplace_back(pid, cid);
  if (rows.empty()) throw IoError("cluster dump: empty input");
  std::sort(rows.begin(), rows.end());
  std::vector<int> raw;
  raw.reserve(rows.size());
  int max_cid = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<long>(i))
      throw IoError("cluster dump: point ids must cover 0..n-1");
    if (rows[i].second < 0) throw IoError("cluster dump: negative cluster id");
    raw.push_back(rows[i].second);
    max_cid = std::max(max_cid, rows[i].second);
  }
  ClusterSet cs = [&] {
    // reuse canonicalization
    std::vector<int> copy = raw;
    ClusterSet out;
    std::vector<int> remap(max_cid + 1, -1);
    out.cluster_of.assign(copy.size(), -1);
    int next = 0;
    for (std::size_t p = 0; p < copy.size(); ++p) {
      int& m = remap[copy[p]];
      if (m == -1) {
        m = next++;
        out.members.emplace_back();
      }
      out.cluster_of[p] = m;
      out.members[m].push_back(static_cast<int>(p));
    }
    return out;
  }();
  cs.validate();
  return cs;
}

}  // namespace pnal
