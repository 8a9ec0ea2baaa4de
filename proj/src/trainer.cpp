#include "pnal/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "pnal/parallel.hpp"
#include "pnal/rng.hpp"

namespace pnal {

namespace {

std::uint64_t key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 24) | static_cast<std::uint64_t>(b);
}

std::vector<Vec3> mean_neighbor_colors(const Scene& scene, const SpatialIndex& index,
                                       int workers) {
  const int n = scene.size();
  const int k = std::min(8, n);
  std::vector<Vec3> out(n);
  parallel_for(n, workers, [&](std::size_t p) {
    const auto nn = index.knn(static_cast<int>(p), k);
    Vec3 acc = {0, 0, 0};
    for (int q : nn)
      for (int a = 0; a < 3; ++a) acc[a] += scene.colors[q][a];
    for (int a = 0; a < 3; ++a) acc[a] /= static_cast<double>(nn.size());
    out[p] = acc;
  });
  return out;
}

// Features are centered around 0 (raw components all live in [0,1]); without
// the centering the softmax gradient is dominated by the shared feature mean
// and the warm-up stage converges far too slowly.
void fill_feature_row(double* f, const Scene& scene, int p, const SceneBlock& block, double z_min,
                      double z_ext, const std::vector<Vec3>& mean_colors) {
  const Vec3& pos = scene.positions[p];
  f[0] = 2.0 * (pos[0] - block.origin_x) / block.size - 1.0;
  f[1] = 2.0 * (pos[1] - block.origin_y) / block.size - 1.0;
  f[2] = 2.0 * (pos[2] - z_min) / z_ext - 1.0;
  f[3] = 2.0 * scene.colors[p][0] - 1.0;
  f[4] = 2.0 * scene.colors[p][1] - 1.0;
  f[5] = 2.0 * scene.colors[p][2] - 1.0;
  f[6] = pos[2] - z_min;
  f[7] = 2.0 * mean_colors[p][0] - 1.0;
  f[8] = 2.0 * mean_colors[p][1] - 1.0;
  f[9] = 2.0 * mean_colors[p][2] - 1.0;
}

// Every point takes its features from the last block containing it, matching
// how block predictions are stitched back into whole scenes.
Matrix stitched_features(const Scene& scene, const SpatialIndex& index,
                         const std::vector<SceneBlock>& blocks, int workers) {
  const int n = scene.size();
  std::vector<int> stitch_block(n, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int p : blocks[b].members) stitch_block[p] = static_cast<int>(b);

  Vec3 lo, hi;
  scene.bounds(lo, hi);
  const double z_ext = std::max(hi[2] - lo[2], 1e-9);
  const auto mean_colors = mean_neighbor_colors(scene, index, workers);

  Matrix out(n, kFeatureDim);
  parallel_for(n, workers, [&](std::size_t p) {
    fill_feature_row(out.row(static_cast<int>(p)), scene, static_cast<int>(p),
                     blocks[stitch_block[p]], lo[2], z_ext, mean_colors);
  });
  return out;
}

std::vector<int> argmax_rows(const Matrix& probs) {
  std::vector<int> out(probs.rows);
  for (int i = 0; i < probs.rows; ++i) {
    const double* row = probs.row(i);
    int best = 0;
    for (int m = 1; m < probs.cols; ++m)
      if (row[m] > row[best]) best = m;
    out[i] = best;
  }
  return out;
}

int label_mode(const std::vector<int>& labels, const std::vector<int>& points, int class_count,
               bool band_only = false, const std::vector<bool>* in_band = nullptr) {
  std::vector<int> counts(class_count, 0);
  for (int p : points) {
    if (band_only && !(*in_band)[p]) continue;
    ++counts[labels[p]];
  }
  int best = 0;
  for (int m = 1; m < class_count; ++m)
    if (counts[m] > counts[best]) best = m;
  return best;
}

}  // namespace

void TrainConfig::validate() const {
  if (pipeline != "pnal" && pipeline != "pnal_boundary" && pipeline != "mixed" &&
      pipeline != "ce")
    throw std::invalid_argument("train config: unknown pipeline '" + pipeline + "'");
  if (total_epochs < 1) throw std::invalid_argument("train config: total_epochs must be >= 1");
  if (boundary_epochs < 0)
    throw std::invalid_argument("train config: boundary_epochs must be >= 0");
  if (history_length < 1)
    throw std::invalid_argument("train config: history_length must be >= 1");
  if (sigma < 0.0 || sigma > 1.0)
    throw std::invalid_argument("train config: sigma outside [0,1]");
  if (gamma < 1.0) throw std::invalid_argument("train config: gamma must be >= 1");
  if (k_boundary < 1) throw std::invalid_argument("train config: k_boundary must be >= 1");
  if (eps_dbscan <= 0.0) throw std::invalid_argument("train config: eps_dbscan must be > 0");
  if (min_pts < 1) throw std::invalid_argument("train config: min_pts must be >= 1");
  if (learning_rate < 0.0)
    throw std::invalid_argument("train config: learning_rate must be >= 0");
  if (block_size <= 0.0 || block_stride <= 0.0 || block_stride > block_size)
    throw std::invalid_argument("train config: bad block size/stride");
  if (points_per_block < 1)
    throw std::invalid_argument("train config: points_per_block must be >= 1");
  if (workers < 1) throw std::invalid_argument("train config: workers must be >= 1");
  if (is_cleaning_pipeline()) {
    const int w = warmup_epochs();
    if (w < history_length)
      throw std::invalid_argument(
          "train config: warm-up epochs must be >= history length (q <= E_warmup)");
    if (w > total_epochs)
      throw std::invalid_argument("train config: warm-up epochs exceed total epochs");
  }
}

int TrainConfig::warmup_epochs() const {
  if (e_warmup >= 0) return e_warmup;
  // warm-up = clean / 5, floored at q
  for (int w = history_length; w <= total_epochs; ++w) {
    const int rule = std::max<int>(history_length,
                                   static_cast<int>(std::llround((total_epochs - w) / 5.0)));
    if (w == rule) return w;
  }
  return std::clamp(static_cast<int>(std::llround(total_epochs / 6.0)), history_length,
                    total_epochs);
}

std::string EpochLog::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["phase"] = phase;
  j["loss"] = loss;
  j["replaced_fraction"] = replaced_fraction;
  if (true_correction_fraction) j["true_correction_fraction"] = *true_correction_fraction;
  j["train_oa"] = train_oa;
  return j.dump();
}

Trainer::PreparedScene::PreparedScene(Scene s, std::vector<int> clean_ref,
                                      const TrainConfig& config, int scene_index)
    : scene(std::move(s)),
      clean(std::move(clean_ref)),
      index(scene),
      history(scene.size(), config.history_length, scene.class_count) {
  Vec3 lo, hi;
  scene.bounds(lo, hi);
  z_min = lo[2];
  z_ext = std::max(hi[2] - lo[2], 1e-9);
  blocks = block_partition(scene, config.block_size, config.block_stride);
  features = stitched_features(scene, index, blocks, config.workers);
  block_samples.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    block_samples.push_back(
        sample_block(blocks[b], config.points_per_block,
                     derive_seed(config.seed, "block-sample", key(scene_index, static_cast<int>(b)))));
  clusters = config.use_instance_clusters
                 ? clusters_from_instances(scene)
                 : dbscan_cluster(scene, config.eps_dbscan, config.min_pts);
  state = CleaningState(scene.labels);
  predictions.assign(scene.size(), 0);
}

Trainer::Trainer(TrainConfig config, RunInput input) : config_(std::move(config)) {
  config_.validate();
  if (input.train.empty()) throw std::invalid_argument("trainer: no training scenes");
  if (!input.clean_labels.empty() && input.clean_labels.size() != input.train.size())
    throw std::invalid_argument("trainer: clean reference count != scene count");

  const int m = input.train.front().class_count;
  for (const Scene& s : input.train) {
    s.validate();
    if (!s.has_labels()) throw std::invalid_argument("trainer: training scene has no labels");
    if (s.class_count != m)
      throw std::invalid_argument("trainer: scenes disagree on class count");
  }
  for (const Scene& s : input.test) {
    s.validate();
    if (!s.has_labels()) throw std::invalid_argument("trainer: test scene has no labels");
    if (s.class_count != m)
      throw std::invalid_argument("trainer: test scenes disagree on class count");
  }

  scenes_.reserve(input.train.size());
  for (std::size_t i = 0; i < input.train.size(); ++i) {
    std::vector<int> clean;
    if (!input.clean_labels.empty() && !input.clean_labels[i].empty()) {
      clean = input.clean_labels[i];
      if (clean.size() != static_cast<std::size_t>(input.train[i].size()))
        throw std::invalid_argument("trainer: clean reference length mismatch");
    }
    scenes_.emplace_back(std::move(input.train[i]), std::move(clean), config_,
                         static_cast<int>(i));
  }
  test_scenes_ = std::move(input.test);

  for (std::size_t s = 0; s < scenes_.size(); ++s)
    for (std::size_t b = 0; b < scenes_[s].blocks.size(); ++b)
      batch_order_.emplace_back(static_cast<int>(s), static_cast<int>(b));

  predictor_ = make_default_predictor(kFeatureDim, m, config_.learning_rate,
                                      derive_seed(config_.seed, "predictor"));

  planned_epochs_ = config_.total_epochs;
  if (config_.pipeline == "mixed") planned_epochs_ += config_.boundary_epochs;
}

Trainer::Phase Trainer::phase_at(int epoch) const {
  if (config_.pipeline == "ce") return Phase::ce;
  if (epoch <= config_.warmup_epochs()) return Phase::warmup;
  if (config_.pipeline == "pnal") return Phase::pnal;
  if (config_.pipeline == "pnal_boundary") return Phase::boundary;
  return epoch <= config_.total_epochs ? Phase::pnal : Phase::boundary;  // mixed
}

const char* Trainer::phase_name(Phase phase) const {
  switch (phase) {
    case Phase::warmup: return "warmup";
    case Phase::ce: return "ce";
    case Phase::pnal: return "pnal";
    case Phase::boundary: return "pnal_boundary";
  }
  return "?";
}

void Trainer::run_warmup() {
  while (epoch_ < planned_epochs_ && phase_at(epoch_ + 1) == Phase::warmup)
    run_epoch(Phase::warmup);
}

bool Trainer::step() {
  if (epoch_ >= planned_epochs_) return false;
  const Phase phase = phase_at(epoch_ + 1);
  if (phase == Phase::boundary && config_.pipeline == "mixed" &&
      config_.reset_history_between_phases && epoch_ + 1 == config_.total_epochs + 1) {
    for (PreparedScene& ps : scenes_) ps.history.clear();
  }
  run_epoch(phase);
  return true;
}

void Trainer::run_remaining_epochs() {
  while (step()) {
  }
}

void Trainer::run_epoch(Phase phase) {
  const int epoch = ++epoch_;
  double loss = 0.0;
  std::vector<EpochSnapshot> pending;

  if (phase == Phase::warmup || phase == Phase::ce) {
    std::vector<std::vector<bool>> include;
    include.reserve(scenes_.size());
    for (const PreparedScene& ps : scenes_)
      include.emplace_back(ps.scene.size(), true);
    loss = fit_epoch(include);
    predict_and_record();
  } else if (phase == Phase::pnal) {
    predict_and_record();
    clean_pnal_epoch();
    std::vector<std::vector<bool>> include;
    include.reserve(scenes_.size());
    for (const PreparedScene& ps : scenes_) include.push_back(ps.state.replaced);
    loss = fit_epoch(include);
    if (config_.record_label_history) {
      EpochSnapshot snap;
      snap.epoch = epoch;
      for (const PreparedScene& ps : scenes_) snap.labels.push_back(ps.state.labels);
      snapshots_.push_back(std::move(snap));
    }
  } else {  // boundary
    predict_and_record();
    std::vector<std::vector<bool>> band_flags(scenes_.size());
    clean_boundary_epoch(band_flags);
    std::vector<std::vector<bool>> include;
    include.reserve(scenes_.size());
    for (std::size_t s = 0; s < scenes_.size(); ++s) {
      const PreparedScene& ps = scenes_[s];
      std::vector<bool> inc(ps.scene.size(), true);
      for (int p = 0; p < ps.scene.size(); ++p)
        if (band_flags[s][p] && !ps.state.replaced[p]) inc[p] = false;
      include.push_back(std::move(inc));
    }
    loss = fit_epoch(include);
    if (config_.record_label_history) {
      EpochSnapshot snap;
      snap.epoch = epoch;
      for (const PreparedScene& ps : scenes_) snap.labels.push_back(ps.state.labels);
      snap.band_flags = std::move(band_flags);
      snapshots_.push_back(std::move(snap));
    }
  }

  log_epoch(phase_name(phase), loss);
}

void Trainer::predict_and_record() {
  for (PreparedScene& ps : scenes_) {
    ps.predictions = argmax_rows(predictor_->predict(ps.features));
    ps.history.record_epoch(ps.predictions);
  }
}

double Trainer::fit_epoch(const std::vector<std::vector<bool>>& include) {
  auto order = batch_order_;
  Rng rng(derive_seed(config_.seed, "batch-order", static_cast<std::uint64_t>(epoch_)));
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const std::size_t j = i + rng.uniform_int(order.size() - i);
    std::swap(order[i], order[j]);
  }

  double loss_sum = 0.0;
  long loss_count = 0;
  Matrix batch(config_.points_per_block, kFeatureDim);
  std::vector<int> targets(config_.points_per_block);
  std::vector<bool> mask(config_.points_per_block);
  for (const auto& [s, b] : order) {
    PreparedScene& ps = scenes_[s];
    const SceneBlock& block = ps.blocks[b];
    const auto& ids = ps.block_samples[b];

    long used = 0;
    for (int r = 0; r < config_.points_per_block; ++r) {
      const int p = ids[r];
      // block-local features for training rows; neighbor colors are reused
      // from the stitched matrix (they do not depend on the block)
      double* f = batch.row(r);
      f[0] = 2.0 * (ps.scene.positions[p][0] - block.origin_x) / block.size - 1.0;
      f[1] = 2.0 * (ps.scene.positions[p][1] - block.origin_y) / block.size - 1.0;
      f[2] = 2.0 * (ps.scene.positions[p][2] - ps.z_min) / ps.z_ext - 1.0;
      f[3] = 2.0 * ps.scene.colors[p][0] - 1.0;
      f[4] = 2.0 * ps.scene.colors[p][1] - 1.0;
      f[5] = 2.0 * ps.scene.colors[p][2] - 1.0;
      f[6] = ps.scene.positions[p][2] - ps.z_min;
      f[7] = ps.features.at(p, 7);
      f[8] = ps.features.at(p, 8);
      f[9] = ps.features.at(p, 9);
      targets[r] = ps.state.labels[p];
      mask[r] = include[s][p];
      if (mask[r]) ++used;
    }
    if (used > 0) {
      const Matrix probs = predictor_->predict(batch);
      loss_sum += cross_entropy(probs, targets, mask) * static_cast<double>(used);
      loss_count += used;
    }
    predictor_->fit_step(batch, targets, mask);
  }
  return loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
}

void Trainer::clean_pnal_epoch() {
  for (std::size_t s = 0; s < scenes_.size(); ++s) {
    PreparedScene& ps = scenes_[s];
    const ReliableSet rel = reliable_set(ps.history, config_.sigma);
    const std::vector<int> eligible = eligible_clusters(ps.clusters, rel);
    Rng vote_rng(derive_seed(config_.seed, "vote", key(epoch_, static_cast<int>(s))));
    std::vector<std::pair<int, int>> winners;
    winners.reserve(eligible.size());
    for (int c : eligible) {
      const auto& members = ps.clusters.members[c];
      const int winner = vote_cluster(members, rel, config_.gamma, vote_rng);
      winners.emplace_back(c, winner);
      int rcount = 0;
      for (int p : members)
        if (rel.reliable[p]) ++rcount;
      corrections_.push_back({epoch_, static_cast<int>(s), c,
                              label_mode(ps.state.labels, members, ps.scene.class_count), winner,
                              rcount});
    }
    correct_labels(ps.state, ps.clusters, winners, config_.mask_on_confirm);
  }
}

void Trainer::clean_boundary_epoch(std::vector<std::vector<bool>>& band_flags) {
  for (std::size_t s = 0; s < scenes_.size(); ++s) {
    PreparedScene& ps = scenes_[s];
    BoundaryBand band;
    if (config_.progressive_band || !ps.has_frozen_band) {
      band = extract_boundary(ps.state.labels, ps.index, config_.k_boundary, ps.state.revision,
                              config_.workers);
      if (!config_.progressive_band) {
        ps.frozen_band = band;
        ps.has_frozen_band = true;
      }
    } else {
      band = ps.frozen_band;
      band.revision = ps.state.revision;
    }
    band_flags[s] = std::vector<bool>(band.in_band.begin(), band.in_band.end());

    const std::vector<int> before = ps.state.labels;
    const ReliableSet rel = reliable_set(ps.history, config_.sigma);
    Rng vote_rng(derive_seed(config_.seed, "boundary-vote", key(epoch_, static_cast<int>(s))));
    const auto applied = boundary_cleaning_epoch(ps.state, band, ps.clusters, ps.history,
                                                 config_.sigma, config_.gamma, vote_rng,
                                                 config_.mask_on_confirm);
    for (const auto& [c, winner] : applied) {
      int rcount = 0;
      for (int p : ps.clusters.members[c])
        if (rel.reliable[p] && band.in_band[p]) ++rcount;
      corrections_.push_back({epoch_, static_cast<int>(s), c,
                              label_mode(before, ps.clusters.members[c], ps.scene.class_count,
                                         true, &band.in_band),
                              winner, rcount});
    }
  }
}

void Trainer::log_epoch(const char* phase, double loss) {
  EpochLog log;
  log.epoch = epoch_;
  log.phase = phase;
  log.loss = loss;

  long n_total = 0, n_replaced = 0, n_match = 0;
  long ref_masked = 0, ref_correct = 0;
  bool any_ref = false;
  for (const PreparedScene& ps : scenes_) {
    n_total += ps.scene.size();
    for (int p = 0; p < ps.scene.size(); ++p) {
      if (ps.state.replaced[p]) ++n_replaced;
      if (ps.predictions[p] == ps.state.labels[p]) ++n_match;
    }
    if (!ps.clean.empty()) {
      any_ref = true;
      for (int p = 0; p < ps.scene.size(); ++p) {
        if (!ps.state.replaced[p]) continue;
        ++ref_masked;
        if (ps.state.labels[p] == ps.clean[p]) ++ref_correct;
      }
    }
  }
  log.replaced_fraction = static_cast<double>(n_replaced) / static_cast<double>(n_total);
  log.train_oa = static_cast<double>(n_match) / static_cast<double>(n_total);
  if (any_ref && ref_masked > 0)
    log.true_correction_fraction =
        static_cast<double>(ref_correct) / static_cast<double>(ref_masked);
  logs_.push_back(std::move(log));
}

RunResult Trainer::finish() {
  RunResult result;
  result.epochs = logs_;
  result.corrections = corrections_;
  result.snapshots = std::move(snapshots_);
  for (const PreparedScene& ps : scenes_) {
    result.cleaned_labels.push_back(ps.state.labels);
    result.replaced_masks.push_back(ps.state.replaced);
  }

  // correction stats against the clean references
  {
    std::vector<int> cleaned, clean_gt, noisy;
    std::vector<bool> mask;
    for (const PreparedScene& ps : scenes_) {
      if (ps.clean.empty()) continue;
      cleaned.insert(cleaned.end(), ps.state.labels.begin(), ps.state.labels.end());
      clean_gt.insert(clean_gt.end(), ps.clean.begin(), ps.clean.end());
      noisy.insert(noisy.end(), ps.scene.labels.begin(), ps.scene.labels.end());
      for (int p = 0; p < ps.scene.size(); ++p) mask.push_back(ps.state.replaced[p]);
    }
    if (!cleaned.empty()) {
      const CorrectionStats stats = correction_stats(cleaned, mask, clean_gt, noisy);
      result.report.replaced_fraction = stats.replaced_fraction;
      result.report.true_correction_fraction = stats.true_correction_fraction;
    } else {
      long n_total = 0, n_replaced = 0;
      for (const PreparedScene& ps : scenes_) {
        n_total += ps.scene.size();
        for (int p = 0; p < ps.scene.size(); ++p)
          if (ps.state.replaced[p]) ++n_replaced;
      }
      result.report.replaced_fraction =
          static_cast<double>(n_replaced) / static_cast<double>(n_total);
    }
  }

  const int m = scenes_.front().scene.class_count;
  if (!test_scenes_.empty()) {
    // held-out evaluation; the band for edge/inner accuracy comes from the
    // clean test labels
    std::vector<int> pred_all, gt_all;
    BoundaryBand band_all;
    for (const Scene& scene : test_scenes_) {
      const auto pred = predict_scene_labels(*predictor_, scene, config_);
      SpatialIndex index(scene);
      const auto band = extract_boundary(scene.labels, index,
                                         std::min(config_.k_boundary, scene.size()), 0,
                                         config_.workers);
      pred_all.insert(pred_all.end(), pred.begin(), pred.end());
      gt_all.insert(gt_all.end(), scene.labels.begin(), scene.labels.end());
      for (int p = 0; p < scene.size(); ++p) band_all.in_band.push_back(band.in_band[p]);
    }
    result.report.oa = overall_accuracy(pred_all, gt_all);
    const IouResult iou = mean_iou(pred_all, gt_all, m);
    result.report.miou = iou.miou;
    result.report.per_class_iou = iou.per_class;
    const EdgeInnerAccuracy ei = edge_inner_accuracy(pred_all, gt_all, band_all);
    result.report.oa_edge = ei.oa_edge;
    result.report.oa_in = ei.oa_in;
  } else {
    // without a test set, measure cleaned labels against the clean reference
    // when present, otherwise predictor agreement with the final labels
    std::vector<int> a_all, b_all;
    for (const PreparedScene& ps : scenes_) {
      if (!ps.clean.empty()) {
        a_all.insert(a_all.end(), ps.state.labels.begin(), ps.state.labels.end());
        b_all.insert(b_all.end(), ps.clean.begin(), ps.clean.end());
      }
    }
    if (a_all.empty()) {
      for (const PreparedScene& ps : scenes_) {
        a_all.insert(a_all.end(), ps.predictions.begin(), ps.predictions.end());
        b_all.insert(b_all.end(), ps.state.labels.begin(), ps.state.labels.end());
      }
    }
    result.report.oa = overall_accuracy(a_all, b_all);
    const IouResult iou = mean_iou(a_all, b_all, m);
    result.report.miou = iou.miou;
    result.report.per_class_iou = iou.per_class;
  }

  result.predictor = std::move(predictor_);
  return result;
}

RunResult run_pipeline(const TrainConfig& config, RunInput input) {
  Trainer trainer(config, std::move(input));
  trainer.run_remaining_epochs();
  return trainer.finish();
}

std::vector<int> predict_scene_labels(const Predictor& predictor, const Scene& scene,
                                      const TrainConfig& config) {
  scene.validate();
  SpatialIndex index(scene);
  const auto blocks = block_partition(scene, config.block_size, config.block_stride);
  const Matrix features = stitched_features(scene, index, blocks, config.workers);
  return argmax_rows(predictor.predict(features));
}

}  // namespace pnal
