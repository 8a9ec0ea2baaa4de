#include "pnal/boundary.hpp"

#include <stdexcept>

#include "pnal/parallel.hpp"

namespace pnal {

BoundaryBand extract_boundary(const std::vector<int>& labels, const SpatialIndex& index, int k,
                              std::uint64_t revision, int workers) {
  const int n = index.size();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("extract_boundary: label count != indexed point count");
  if (k < 1 || k > n) throw std::invalid_argument("extract_boundary: k must be in [1, N]");

  std::vector<std::vector<int>> neighborhoods(n);
  std::vector<char> is_boundary(n, 0);
  parallel_for(n, workers, [&](std::size_t p) {
    auto nn = index.knn(static_cast<int>(p), k);
    for (int q : nn)
      if (labels[q] != labels[p]) {
        is_boundary[p] = 1;
        break;
      }
    if (is_boundary[p]) neighborhoods[p] = std::move(nn);
  });

  BoundaryBand band;
  band.k = k;
  band.revision = revision;
  band.in_band.assign(n, false);
  for (int p = 0; p < n; ++p)
    if (is_boundary[p])
      for (int q : neighborhoods[p]) band.in_band[q] = true;
  for (int p = 0; p < n; ++p)
    if (band.in_band[p]) band.members.push_back(p);
  return band;
}

std::vector<std::pair<int, int>> boundary_cleaning_epoch(CleaningState& state,
                                                         const BoundaryBand& band,
                                                         const ClusterSet& clusters,
                                                         const PredictionHistory& history,
                                                         double sigma, double gamma, Rng& rng,
                                                         bool mask_on_confirm) {
  if (band.in_band.size() != state.labels.size())
    throw std::invalid_argument("boundary_cleaning_epoch: band and state disagree on size");
  if (band.revision != state.revision)
    throw std::invalid_argument("boundary_cleaning_epoch: stale band (labels changed since extraction)");
  if (clusters.cluster_of.size() != state.labels.size())
    throw std::invalid_argument("boundary_cleaning_epoch: cluster set and state disagree on size");

  const ReliableSet reliable = reliable_set(history, sigma);

  // Eligibility and votes restricted to reliable points inside the band.
  ReliableSet banded = reliable;
  for (std::size_t p = 0; p < banded.reliable.size(); ++p)
    if (!band.in_band[p]) {
      banded.reliable[p] = false;
      banded.best_label[p] = -1;
    }

  std::vector<std::pair<int, int>> applied;
  bool wrote = false;
  for (int c = 0; c < clusters.count(); ++c) {
    bool eligible = false;
    for (int p : clusters.members[c])
      if (banded.reliable[p]) {
        eligible = true;
        break;
      }
    if (!eligible) continue;
    const int winner = vote_cluster(clusters.members[c], banded, gamma, rng);
    applied.emplace_back(c, winner);
    for (int p : clusters.members[c]) {
      if (!band.in_band[p]) continue;  // inner points are never modified
      if (state.labels[p] != winner) {
        state.labels[p] = winner;
        state.replaced[p] = true;
        wrote = true;
      } else if (mask_on_confirm) {
        state.replaced[p] = true;
      }
    }
  }
  if (wrote || !applied.empty()) ++state.revision;
  return applied;
}

CleaningState progressive_loop(CleaningState state, const SpatialIndex& index,
                               const ClusterSet& clusters, PredictionHistory& history,
                               PredictorDriver& driver, int epochs, int k, double sigma,
                               double gamma, std::uint64_t seed, bool progressive,
                               bool mask_on_confirm, int workers) {
  if (epochs < 0) throw std::invalid_argument("progressive_loop: negative epoch count");
  BoundaryBand frozen;
  bool have_frozen = false;
  for (int e = 0; e < epochs; ++e) {
    history.record_epoch(driver.predict_classes());

    BoundaryBand band;
    if (progressive || !have_frozen) {
      band = extract_boundary(state.labels, index, k, state.revision, workers);
      if (!progressive) {
        frozen = band;
        have_frozen = true;
      }
    } else {
      // Frozen-band ablation: reuse the first band's membership against the
      // current labels.
      band = frozen;
      band.revision = state.revision;
    }

    Rng rng(derive_seed(seed, "boundary-vote", static_cast<std::uint64_t>(e)));
    boundary_cleaning_epoch(state, band, clusters, history, sigma, gamma, rng, mask_on_confirm);

    std::vector<bool> include(state.labels.size(), true);
    for (std::size_t p = 0; p < include.size(); ++p)
      if (band.in_band[p] && !state.replaced[p]) include[p] = false;
    driver.fit_epoch(state.labels, include);
  }
  return state;
}

}  // namespace pnal
