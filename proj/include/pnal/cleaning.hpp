#pragma once

#include <cstdint>
#include <vector>

#include "pnal/cluster.hpp"
#include "pnal/rng.hpp"

namespace pnal {

// Per-point ring buffer of the last `capacity` predicted class ids.
class PredictionHistory {
 public:
  PredictionHistory(int point_count, int capacity, int class_count);

  int point_count() const { return point_count_; }
  int capacity() const { return capacity_; }
  int class_count() const { return class_count_; }
  int fill() const { return fill_; }

  // Appends one prediction per point, evicting the oldest entry when full.
  void record_epoch(const std::vector<int>& predictions);

  // Entries currently held for one point, oldest first.
  std::vector<int> entries(int point) const;

  // P(m | x; q): per-class frequency over the buffer. Buffer must be non-empty.
  std::vector<double> label_distribution(int point) const;

  // Normalized entropy of the label distribution, in [0, 1]: 0 for a constant
  // buffer, 1 for a uniform spread over all classes. Natural log, 0*log 0 = 0.
  double confidence(int point) const;

  // Most frequent entry, ties broken by lower class id.
  int best_label(int point) const;

  void clear();

 private:
  void check_point(int point) const;

  int point_count_;
  int capacity_;
  int class_count_;
  int fill_ = 0;
  int head_ = 0;  // next write slot
  std::vector<std::int16_t> buffer_;  // point-major, capacity entries each
};

struct ReliableSet {
  std::vector<bool> reliable;
  std::vector<int> best_label;  // -1 where not reliable

  int count() const;
};

// A point is reliable when its recent predictions are consistent enough:
// normalized history entropy <= sigma. Every buffer must hold at least one
// entry.
ReliableSet reliable_set(const PredictionHistory& history, double sigma);

// Ascending ids of clusters containing at least one reliable member.
std::vector<int> eligible_clusters(const ClusterSet& clusters, const ReliableSet& reliable);

// Occurrence vote among the reliable members' best labels: the winner is
// drawn uniformly from {m : occ[m] * gamma >= max occ}. The cluster must have
// a reliable member.
int vote_cluster(const std::vector<int>& members, const ReliableSet& reliable, double gamma,
                 Rng& rng);

// Current training labels plus the monotone replaced mask. `revision`
// increments whenever labels are written so stale derived structures can be
// detected.
struct CleaningState {
  std::vector<int> labels;
  std::vector<bool> replaced;
  std::uint64_t revision = 0;

  explicit CleaningState(std::vector<int> initial_labels)
      : labels(std::move(initial_labels)), replaced(labels.size(), false) {}
  CleaningState() = default;
};

// Overwrites every point of each winning cluster with the winner label. With
// mask_on_confirm (default), points whose label was merely confirmed are
// still marked replaced: a confirmed label has been vetted and may join the
// training loss.
void correct_labels(CleaningState& state, const ClusterSet& clusters,
                    const std::vector<std::pair<int, int>>& winners, bool mask_on_confirm = true);

}  // namespace pnal
