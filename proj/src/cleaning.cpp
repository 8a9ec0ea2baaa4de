#include "pnal/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pnal {

PredictionHistory::PredictionHistory(int point_count, int capacity, int class_count)
    : point_count_(point_count), capacity_(capacity), class_count_(class_count) {
  if (point_count < 1) throw std::invalid_argument("history: point count must be >= 1");
  if (capacity < 1) throw std::invalid_argument("history: capacity must be >= 1");
  if (class_count < 2) throw std::invalid_argument("history: class count must be >= 2");
  buffer_.assign(static_cast<std::size_t>(point_count) * capacity, 0);
}

void PredictionHistory::check_point(int point) const {
  if (point < 0 || point >= point_count_)
    throw std::invalid_argument("history: point id out of range");
}

void PredictionHistory::record_epoch(const std::vector<int>& predictions) {
  if (static_cast<int>(predictions.size()) != point_count_)
    throw std::invalid_argument("record_epoch: prediction count != point count");
  for (int m : predictions)
    if (m < 0 || m >= class_count_)
      throw std::invalid_argument("record_epoch: prediction outside class range");
  for (int p = 0; p < point_count_; ++p)
    buffer_[static_cast<std::size_t>(p) * capacity_ + head_] =
        static_cast<std::int16_t>(predictions[p]);
  head_ = (head_ + 1) % capacity_;
  fill_ = std::min(fill_ + 1, capacity_);
}

std::vector<int> PredictionHistory::entries(int point) const {
  check_point(point);
  std::vector<int> out;
  out.reserve(fill_);
  // oldest first: when full the oldest sits at head_, otherwise at 0
  const int start = fill_ == capacity_ ? head_ : 0;
  for (int i = 0; i < fill_; ++i)
    out.push_back(buffer_[static_cast<std::size_t>(point) * capacity_ + (start + i) % capacity_]);
  return out;
}

std::vector<double> PredictionHistory::label_distribution(int point) const {
  check_point(point);
  if (fill_ == 0) throw std::invalid_argument("label_distribution: empty history buffer");
  std::vector<double> dist(class_count_, 0.0);
  const double w = 1.0 / static_cast<double>(fill_);
  const std::int16_t* row = buffer_.data() + static_cast<std::size_t>(point) * capacity_;
  for (int i = 0; i < fill_; ++i) dist[row[i]] += w;
  return dist;
}

double PredictionHistory::confidence(int point) const {
  const auto dist = label_distribution(point);
  double entropy = 0.0;
  for (double p : dist)
    if (p > 0.0) entropy -= p * std::log(p);
  return entropy / std::log(static_cast<double>(class_count_));
}

int PredictionHistory::best_label(int point) const {
  check_point(point);
  if (fill_ == 0) throw std::invalid_argument("best_label: empty history buffer");
  std::vector<int> counts(class_count_, 0);
  const std::int16_t* row = buffer_.data() + static_cast<std::size_t>(point) * capacity_;
  for (int i = 0; i < fill_; ++i) ++counts[row[i]];
  int best = 0;
  for (int m = 1; m < class_count_; ++m)
    if (counts[m] > counts[best]) best = m;
  return best;
}

void PredictionHistory::clear() {
  fill_ = 0;
  head_ = 0;
  std::fill(buffer_.begin(), buffer_.end(), 0);
}

int ReliableSet::count() const {
  return static_cast<int>(std::count(reliable.begin(), reliable.end(), true));
}

ReliableSet reliable_set(const PredictionHistory& history, double sigma) {
  if (sigma < 0.0 || sigma > 1.0) throw std::invalid_argument("reliable_set: sigma outside [0,1]");
  if (history.fill() == 0) throw std::invalid_argument("reliable_set: history is empty");
  const int n = history.point_count();
  ReliableSet out;
  out.reliable.assign(n, false);
  out.best_label.assign(n, -1);
  for (int p = 0; p < n; ++p) {
    if (history.confidence(p) <= sigma) {
      out.reliable[p] = true;
      out.best_label[p] = history.best_label(p);
    }
  }
  return out;
}

std::vector<int> eligible_clusters(const ClusterSet& clusters, const ReliableSet& reliable) {
  if (clusters.cluster_of.size() != reliable.reliable.size())
    throw std::invalid_argument("eligible_clusters: cluster set and reliable set disagree on size");
  std::vector<int> out;
  for (int c = 0; c < clusters.count(); ++c) {
    for (int p : clusters.members[c]) {
      if (reliable.reliable[p]) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

int vote_cluster(const std::vector<int>& members, const ReliableSet& reliable, double gamma,
                 Rng& rng) {
  if (gamma < 1.0) throw std::invalid_argument("vote_cluster: gamma must be >= 1");
  std::vector<int> occ;
  int occ_top = 0;
  for (int p : members) {
    if (!reliable.reliable[p]) continue;
    const int m = reliable.best_label[p];
    if (m >= static_cast<int>(occ.size())) occ.resize(m + 1, 0);
    occ_top = std::max(occ_top, ++occ[m]);
  }
  if (occ_top == 0) throw std::invalid_argument("vote_cluster: cluster has no reliable member");
  // occ[m] >= occ_top / gamma, kept exact for integral gamma by comparing
  // occ[m] * gamma against occ_top.
  std::vector<int> candidates;
  for (int m = 0; m < static_cast<int>(occ.size()); ++m)
    if (occ[m] > 0 && static_cast<double>(occ[m]) * gamma >= static_cast<double>(occ_top))
      candidates.push_back(m);
  return candidates[rng.uniform_int(candidates.size())];
}

void correct_labels(CleaningState& state, const ClusterSet& clusters,
                    const std::vector<std::pair<int, int>>& winners, bool mask_on_confirm) {
  if (state.labels.size() != clusters.cluster_of.size())
    throw std::invalid_argument("correct_labels: state and cluster set disagree on size");
  for (const auto& [cluster_id, winner] : winners) {
    if (cluster_id < 0 || cluster_id >= clusters.count())
      throw std::invalid_argument("correct_labels: unknown cluster id");
    for (int p : clusters.members[cluster_id]) {
      if (state.labels[p] != winner) {
        state.labels[p] = winner;
        state.replaced[p] = true;
      } else if (mask_on_confirm) {
        state.replaced[p] = true;
      }
    }
  }
  if (!winners.empty()) ++state.revision;
}

}  // namespace pnal
