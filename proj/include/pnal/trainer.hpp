#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pnal/blocks.hpp"
#include "pnal/boundary.hpp"
#include "pnal/cleaning.hpp"
#include "pnal/cluster.hpp"
#include "pnal/metrics.hpp"
#include "pnal/predictor.hpp"
#include "pnal/scene.hpp"
#include "pnal/spatial_index.hpp"

namespace pnal {

// Per-point features fed to the default predictor: block-normalized x,y,z,
// rgb, height above the scene floor, and the mean color of the 8 nearest
// neighbors.
inline constexpr int kFeatureDim = 10;

struct TrainConfig {
  std::string pipeline = "pnal";  // pnal | pnal_boundary | mixed | ce
  int total_epochs = 30;
  int e_warmup = -1;       // -1: warm-up = round(clean/5), floored at q
  int boundary_epochs = 10;  // mixed pipeline: boundary epochs after total_epochs
  int history_length = 4;  // q
  double sigma = 0.05;
  double gamma = 4.0;
  int k_boundary = 20;
  double eps_dbscan = 0.018;
  int min_pts = 10;
  bool use_instance_clusters = false;
  double learning_rate = 0.5;
  double block_size = 1.0;
  double block_stride = 0.5;
  int points_per_block = 4096;
  std::uint64_t seed = 1;
  bool mask_on_confirm = true;
  bool progressive_band = true;
  bool reset_history_between_phases = false;
  bool record_label_history = false;  // per-epoch label/band snapshots
  int workers = 1;

  void validate() const;
  int warmup_epochs() const;
  bool is_cleaning_pipeline() const { return pipeline != "ce"; }
};

struct RunInput {
  std::vector<Scene> train;
  // Optional clean reference labels per training scene (empty = absent).
  std::vector<std::vector<int>> clean_labels;
  // Optional held-out clean test scenes.
  std::vector<Scene> test;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  std::string phase;
  double loss = 0.0;
  double replaced_fraction = 0.0;
  std::optional<double> true_correction_fraction;
  double train_oa = 0.0;

  std::string to_json() const;
};

struct CorrectionEvent {
  int epoch = 0;
  int scene = 0;
  int cluster = 0;
  int old_label = 0;
  int new_label = 0;
  int reliable_count = 0;
};

// Snapshot after one cleaning epoch; used to verify band-restricted writes.
struct EpochSnapshot {
  int epoch = 0;
  std::vector<std::vector<int>> labels;       // per scene
  std::vector<std::vector<bool>> band_flags;  // per scene; empty outside boundary phases
};

struct RunResult {
  std::vector<EpochLog> epochs;
  std::vector<CorrectionEvent> corrections;
  std::vector<std::vector<int>> cleaned_labels;
  std::vector<std::vector<bool>> replaced_masks;
  std::vector<EpochSnapshot> snapshots;
  std::unique_ptr<Predictor> predictor;
  MetricReport report;
};

// Two-stage training around a pluggable per-point predictor: warm-up on the
// given labels, then per-epoch label cleaning (instance-style, boundary-style
// or both) driving masked updates.
class Trainer {
 public:
  Trainer(TrainConfig config, RunInput input);

  void run_warmup();
  void run_remaining_epochs();
  // Runs a single epoch; returns false once all planned epochs are done.
  bool step();
  RunResult finish();

  // inspection hooks
  int epochs_run() const { return epoch_; }
  const PredictionHistory& history(int scene) const { return scenes_.at(scene).history; }
  const CleaningState& state(int scene) const { return scenes_.at(scene).state; }
  const ClusterSet& clusters(int scene) const { return scenes_.at(scene).clusters; }
  const Predictor& predictor() const { return *predictor_; }

 private:
  struct PreparedScene {
    PreparedScene(Scene s, std::vector<int> clean_ref, const TrainConfig& config, int scene_index);

    Scene scene;             // original (noisy) labels, never mutated
    std::vector<int> clean;  // empty when absent
    double z_min = 0.0;
    double z_ext = 1.0;
    SpatialIndex index;
    std::vector<SceneBlock> blocks;
    Matrix features;  // stitched, N x kFeatureDim
    std::vector<std::vector<int>> block_samples;
    ClusterSet clusters;
    CleaningState state;
    PredictionHistory history;
    std::vector<int> predictions;
    BoundaryBand frozen_band;
    bool has_frozen_band = false;
  };

  enum class Phase { warmup, ce, pnal, boundary };

  void run_epoch(Phase phase);
  void predict_and_record();
  double fit_epoch(const std::vector<std::vector<bool>>& include);
  void clean_pnal_epoch();
  void clean_boundary_epoch(std::vector<std::vector<bool>>& band_flags);
  void log_epoch(const char* phase, double loss);
  Phase phase_at(int epoch) const;
  const char* phase_name(Phase phase) const;

  TrainConfig config_;
  std::vector<PreparedScene> scenes_;
  std::vector<Scene> test_scenes_;
  std::vector<std::pair<int, int>> batch_order_;  // (scene, block)
  std::unique_ptr<Predictor> predictor_;
  int epoch_ = 0;  // epochs completed
  int planned_epochs_ = 0;
  std::vector<EpochLog> logs_;
  std::vector<CorrectionEvent> corrections_;
  std::vector<EpochSnapshot> snapshots_;
};

RunResult run_pipeline(const TrainConfig& config, RunInput input);

// Stitched full-scene inference: block features are computed per point from
// the last block containing it, then classified and re-assembled by point id.
std::vector<int> predict_scene_labels(const Predictor& predictor, const Scene& scene,
                                      const TrainConfig& config);

}  // namespace pnal
