#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pnal/cleaning.hpp"
#include "pnal/noise.hpp"
#include "pnal/predictor.hpp"
#include "pnal/rng.hpp"
#include "pnal/synthgen.hpp"
#include "pnal/trainer.hpp"

using namespace pnal;

namespace {

Matrix one_hot_rows(const std::vector<int>& ids, int m) {
  Matrix out(static_cast<int>(ids.size()), m);
  for (int i = 0; i < out.rows; ++i) out.at(i, ids[i]) = 1.0;
  return out;
}

RunInput small_input(int scenes, std::uint64_t seed, double tau = 0.0) {
  SynthSpec spec;
  spec.class_count = 4;
  spec.instances_per_class = 1;
  spec.points_per_instance = 180;
  spec.room = {1.8, 1.8, 1.0};
  RunInput input;
  input.train = generate_dataset(spec, scenes, seed);
  for (auto& s : input.train) {
    input.clean_labels.push_back(s.labels);
    if (tau > 0.0) s.labels = inject_symmetric(s, tau, derive_seed(seed, "noise"));
  }
  return input;
}

TrainConfig small_config() {
  TrainConfig c;
  c.total_epochs = 8;
  c.e_warmup = 4;
  c.history_length = 4;
  c.min_pts = 4;
  c.points_per_block = 256;
  c.block_size = 1.0;
  c.block_stride = 0.5;
  c.learning_rate = 0.5;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("cross entropy: exact one-hot, uniform, and empty mask") {
  const Matrix perfect = one_hot_rows({0, 1, 2}, 3);
  CHECK(cross_entropy(perfect, {0, 1, 2}, {true, true, true}) ==
        doctest::Approx(0.0).epsilon(1e-9));

  Matrix uniform(2, 12);
  for (double& v : uniform.data) v = 1.0 / 12.0;
  CHECK(cross_entropy(uniform, {3, 7}, {true, true}) ==
        doctest::Approx(std::log(12.0)).epsilon(1e-12));

  CHECK(cross_entropy(uniform, {3, 7}, {false, false}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cross_entropy(uniform, {3}, {true, true}), std::invalid_argument);
}

TEST_CASE("cross entropy matches an independent computation on random batches") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int b = 1 + static_cast<int>(rng.uniform_int(16));
    const int m = 2 + static_cast<int>(rng.uniform_int(8));
    Matrix probs(b, m);
    std::vector<int> targets(b);
    std::vector<bool> mask(b);
    for (int i = 0; i < b; ++i) {
      double sum = 0;
      for (int j = 0; j < m; ++j) sum += (probs.at(i, j) = 0.01 + rng.uniform());
      for (int j = 0; j < m; ++j) probs.at(i, j) /= sum;
      targets[i] = static_cast<int>(rng.uniform_int(m));
      mask[i] = rng.uniform() < 0.7;
    }
    double expected = 0;
    long used = 0;
    for (int i = 0; i < b; ++i)
      if (mask[i]) {
        expected -= std::log(std::max(probs.at(i, targets[i]), 1e-12));
        ++used;
      }
    if (used) expected /= used;
    CHECK(cross_entropy(probs, targets, mask) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("default predictor: separable classes reach high accuracy") {
  // two linearly separable classes with a wide margin
  Rng rng(5);
  const int n = 400;
  Matrix x(n, kFeatureDim);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    y[i] = c;
    for (int d = 0; d < kFeatureDim; ++d) x.at(i, d) = 0.02 * rng.normal();
    x.at(i, 3) += c == 0 ? 0.8 : 0.2;  // margin 0.6 >> noise 0.02
    x.at(i, 4) += c == 0 ? 0.2 : 0.8;
  }
  auto p = make_default_predictor(kFeatureDim, 2, 0.5, 1);
  const std::vector<bool> all(n, true);
  for (int epoch = 0; epoch < 5; ++epoch)
    for (int start = 0; start < n; start += 64) {
      Matrix batch(std::min(64, n - start), kFeatureDim);
      std::vector<int> bt(batch.rows);
      std::vector<bool> bm(batch.rows, true);
      for (int r = 0; r < batch.rows; ++r) {
        for (int d = 0; d < kFeatureDim; ++d) batch.at(r, d) = x.at(start + r, d);
        bt[r] = y[start + r];
      }
      p->fit_step(batch, bt, bm);
    }
  const Matrix probs = p->predict(x);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int m = 1; m < 2; ++m)
      if (probs.at(i, m) > probs.at(i, best)) best = m;
    hits += best == y[i];
  }
  CHECK(static_cast<double>(hits) / n >= 0.99);
}

TEST_CASE("zero learning rate freezes predictions; all-false mask is a no-op") {
  Rng rng(6);
  Matrix x(32, kFeatureDim);
  std::vector<int> y(32);
  for (int i = 0; i < 32; ++i) {
    for (int d = 0; d < kFeatureDim; ++d) x.at(i, d) = rng.uniform();
    y[i] = i % 3;
  }
  auto frozen = make_default_predictor(kFeatureDim, 3, 0.0, 2);
  const Matrix before = frozen->predict(x);
  frozen->fit_step(x, y, std::vector<bool>(32, true));
  CHECK(frozen->predict(x).data == before.data);

  auto masked = make_default_predictor(kFeatureDim, 3, 0.7, 2);
  const Matrix before2 = masked->predict(x);
  masked->fit_step(x, y, std::vector<bool>(32, false));
  CHECK(masked->predict(x).data == before2.data);
}

TEST_CASE("identical seeds give bitwise-identical parameter trajectories") {
  Rng rng(7);
  Matrix x(48, kFeatureDim);
  std::vector<int> y(48);
  for (int i = 0; i < 48; ++i) {
    for (int d = 0; d < kFeatureDim; ++d) x.at(i, d) = rng.uniform();
    y[i] = i % 4;
  }
  auto a = make_default_predictor(kFeatureDim, 4, 0.3, 99);
  auto b = make_default_predictor(kFeatureDim, 4, 0.3, 99);
  const std::vector<bool> all(48, true);
  for (int step = 0; step < 10; ++step) {
    a->fit_step(x, y, all);
    b->fit_step(x, y, all);
  }
  CHECK(a->predict(x).data == b->predict(x).data);
}

TEST_CASE("masked training equals training on the masked-in subset alone") {
  Rng rng(8);
  const int n = 60;
  Matrix x(n, kFeatureDim);
  std::vector<int> y(n);
  std::vector<bool> mask(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < kFeatureDim; ++d) x.at(i, d) = rng.uniform();
    y[i] = i % 3;
    mask[i] = rng.uniform() < 0.5;
  }
  int kept = 0;
  for (bool b : mask) kept += b;
  Matrix x_sub(kept, kFeatureDim);
  std::vector<int> y_sub;
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    for (int d = 0; d < kFeatureDim; ++d) x_sub.at(r, d) = x.at(i, d);
    y_sub.push_back(y[i]);
    ++r;
  }
  auto a = make_default_predictor(kFeatureDim, 3, 0.4, 5);
  auto b = make_default_predictor(kFeatureDim, 3, 0.4, 5);
  for (int step = 0; step < 6; ++step) {
    a->fit_step(x, y, mask);
    b->fit_step(x_sub, y_sub, std::vector<bool>(kept, true));
  }
  CHECK(a->predict(x).data == b->predict(x).data);
}

TEST_CASE("warm-up fills every history buffer to q") {
  TrainConfig c = small_config();
  Trainer t(c, small_input(2, 21));
  t.run_warmup();
  CHECK(t.epochs_run() == 4);
  CHECK(t.history(0).fill() == 4);
  CHECK(t.history(1).fill() == 4);
}

TEST_CASE("warm-up below the history length is rejected") {
  TrainConfig c = small_config();
  c.e_warmup = 2;  // q = 4
  CHECK_THROWS_AS(Trainer(c, small_input(1, 22)), std::invalid_argument);
}

TEST_CASE("unknown pipeline is rejected before any work") {
  TrainConfig c = small_config();
  c.pipeline = "nonsense";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("auto warm-up follows the clean/5 rule") {
  TrainConfig c;
  c.e_warmup = -1;
  c.total_epochs = 30;
  CHECK(c.warmup_epochs() == 5);  // 25 cleaning epochs / 5
  c.total_epochs = 12;
  CHECK(c.warmup_epochs() == 4);  // floored at q
}

TEST_CASE("clean labels with a perfectly consistent predictor are a fixed point") {
  // unanimous clean histories: every vote confirms the existing label
  const Scene scene = generate_scene([] {
    SynthSpec spec;
    spec.class_count = 4;
    spec.instances_per_class = 1;
    spec.points_per_instance = 120;
    spec.room = {1.6, 1.6, 1.0};
    spec.seed = 40;
    return spec;
  }());
  const ClusterSet clusters = clusters_from_instances(scene);
  PredictionHistory history(scene.size(), 4, scene.class_count);
  for (int e = 0; e < 4; ++e) history.record_epoch(scene.labels);

  CleaningState state(scene.labels);
  for (int epoch = 0; epoch < 3; ++epoch) {
    const ReliableSet rel = reliable_set(history, 0.05);
    Rng rng(derive_seed(1, "vote", epoch));
    std::vector<std::pair<int, int>> winners;
    for (int c : eligible_clusters(clusters, rel))
      winners.emplace_back(c, vote_cluster(clusters.members[c], rel, 4.0, rng));
    correct_labels(state, clusters, winners);
    CHECK(state.labels == scene.labels);
  }
  // labels confirmed, so the whole scene is vetted for the loss
  CHECK(std::count(state.replaced.begin(), state.replaced.end(), false) == 0);
}

TEST_CASE("pipeline runs are deterministic functions of config and seed") {
  TrainConfig c = small_config();
  c.total_epochs = 6;
  RunResult a = run_pipeline(c, small_input(2, 24, 0.5));
  RunResult b = run_pipeline(c, small_input(2, 24, 0.5));
  CHECK(a.cleaned_labels == b.cleaned_labels);
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i)
    CHECK(a.epochs[i].to_json() == b.epochs[i].to_json());

  c.workers = 4;  // worker count must not change results
  RunResult d = run_pipeline(c, small_input(2, 24, 0.5));
  CHECK(d.cleaned_labels == a.cleaned_labels);
  for (std::size_t i = 0; i < a.epochs.size(); ++i)
    CHECK(d.epochs[i].to_json() == a.epochs[i].to_json());
}

TEST_CASE("epoch log: phases and counts for each pipeline") {
  TrainConfig c = small_config();
  c.total_epochs = 6;
  c.e_warmup = 4;
  {
    RunResult r = run_pipeline(c, small_input(1, 25, 0.4));
    REQUIRE(r.epochs.size() == 6);
    CHECK(r.epochs[3].phase == "warmup");
    CHECK(r.epochs[4].phase == "pnal");
  }
  {
    TrainConfig b = c;
    b.pipeline = "pnal_boundary";
    RunResult r = run_pipeline(b, small_input(1, 25, 0.0));
    CHECK(r.epochs[5].phase == "pnal_boundary");
  }
  {
    TrainConfig mix = c;
    mix.pipeline = "mixed";
    mix.boundary_epochs = 2;
    RunResult r = run_pipeline(mix, small_input(1, 25, 0.0));
    REQUIRE(r.epochs.size() == 8);
    CHECK(r.epochs[5].phase == "pnal");
    CHECK(r.epochs[6].phase == "pnal_boundary");  // phase switch after total_epochs
  }
  {
    TrainConfig ce = c;
    ce.pipeline = "ce";
    RunResult r = run_pipeline(ce, small_input(1, 25, 0.4));
    for (const auto& log : r.epochs) CHECK(log.phase == "ce");
    CHECK(r.report.replaced_fraction.value_or(0.0) == doctest::Approx(0.0));
  }
}

TEST_CASE("replaced fraction is non-decreasing across epochs") {
  TrainConfig c = small_config();
  c.total_epochs = 8;
  RunResult r = run_pipeline(c, small_input(2, 26, 0.5));
  double prev = 0.0;
  for (const auto& log : r.epochs) {
    CHECK(log.replaced_fraction >= prev - 1e-12);
    prev = log.replaced_fraction;
  }
}

TEST_CASE("mixed pipeline can reset histories at the phase switch") {
  TrainConfig c = small_config();
  c.pipeline = "mixed";
  c.total_epochs = 6;
  c.boundary_epochs = 2;

  Trainer shared(c, small_input(1, 28, 0.3));
  shared.run_remaining_epochs();
  CHECK(shared.history(0).fill() == 4);  // continuous across phases

  c.reset_history_between_phases = true;
  Trainer reset(c, small_input(1, 28, 0.3));
  reset.run_remaining_epochs();
  // cleared at the switch, then one record per boundary epoch
  CHECK(reset.history(0).fill() == 2);
}

TEST_CASE("30 total epochs with 5 warm-up run 25 cleaning epochs") {
  TrainConfig c = small_config();
  c.total_epochs = 30;
  c.e_warmup = 5;
  c.points_per_block = 128;
  RunResult r = run_pipeline(c, small_input(1, 27, 0.4));
  REQUIRE(r.epochs.size() == 30);
  int warmup = 0, cleaning = 0;
  for (const auto& log : r.epochs) {
    if (log.phase == "warmup") ++warmup;
    if (log.phase == "pnal") ++cleaning;
  }
  CHECK(warmup == 5);
  CHECK(cleaning == 25);
}
