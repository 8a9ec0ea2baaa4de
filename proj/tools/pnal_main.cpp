// Command-line front-end: synthetic data generation, label-noise injection,
// clustering, noise-adaptive training, and evaluation, all driven by a JSON
// config plus flag overrides. Every subcommand is deterministic for a fixed
// config and seed.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pnal/blocks.hpp"
#include "pnal/boundary.hpp"
#include "pnal/cluster.hpp"
#include "pnal/errors.hpp"
#include "pnal/metrics.hpp"
#include "pnal/noise.hpp"
#include "pnal/rng.hpp"
#include "pnal/scene.hpp"
#include "pnal/synthgen.hpp"
#include "pnal/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
  std::string config_path;
  std::string input;   // manifest or scene file
  std::string output;  // output directory / file
  std::vector<std::string> scenes;
  std::string clean_input;
  std::string test_input;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> eps;
  std::optional<int> min_pts;
  std::optional<std::string> pipeline;
  std::optional<std::string> noise_kind;
  std::optional<double> tau, tau_pair, alpha, beta;
  std::optional<int> scene_count;
  std::optional<int> total_epochs, e_warmup;
  std::optional<double> sigma, gamma, lr;
  std::optional<int> k_boundary;
  bool dump_bands = false;
  bool use_instances = false;
  bool no_progressive = false;
  bool dump_epoch_labels = false;
  std::string pred_path, gt_path;
  std::string cleaned_path, mask_path, clean_path, noisy_path;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pnal::IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return j;
}

fs::path resolve_output(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("PNAL_OUTPUT_ROOT")) p = fs::path(root) / p;
  }
  return p;
}

int env_workers() {
  if (const char* w = std::getenv("PNAL_WORKERS")) {
    const int v = std::atoi(w);
    if (v >= 1) return v;
  }
  return 1;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pnal::IoError("cannot write " + path.string());
  out << text;
  if (!out) throw pnal::IoError("error writing " + path.string());
}

pnal::SynthSpec synth_spec_from(const json& cfg) {
  pnal::SynthSpec spec;
  if (!cfg.contains("synth")) return spec;
  const json& s = cfg["synth"];
  if (s.contains("room")) {
    const auto room = s["room"].get<std::vector<double>>();
    if (room.size() != 3) throw std::invalid_argument("config: synth.room needs 3 extents");
    spec.room = {room[0], room[1], room[2]};
  }
  spec.class_count = s.value("class_count", spec.class_count);
  spec.instances_per_class = s.value("instances_per_class", spec.instances_per_class);
  spec.points_per_instance = s.value("points_per_instance", spec.points_per_instance);
  spec.color_noise = s.value("color_noise", spec.color_noise);
  spec.contact = s.value("contact", spec.contact);
  return spec;
}

pnal::NoiseSpec noise_spec_from(const json& cfg) {
  pnal::NoiseSpec spec;
  if (!cfg.contains("noise")) return spec;
  const json& s = cfg["noise"];
  spec.kind = pnal::noise_kind_from_string(s.value("kind", "symmetric"));
  spec.tau = s.value("tau", 0.0);
  spec.tau_pair = s.value("tau_pair", 0.0);
  spec.alpha = s.value("alpha", 0.0);
  spec.beta = s.value("beta", 0.0);
  if (s.contains("pairs"))
    for (const auto& p : s["pairs"]) {
      if (!p.is_array() || p.size() != 2)
        throw std::invalid_argument("config: noise.pairs entries must be [a, b]");
      spec.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  return spec;
}

pnal::TrainConfig train_config_from(const json& cfg) {
  pnal::TrainConfig tc;
  if (!cfg.contains("train")) return tc;
  const json& t = cfg["train"];
  tc.pipeline = t.value("pipeline", tc.pipeline);
  tc.total_epochs = t.value("total_epochs", tc.total_epochs);
  tc.e_warmup = t.value("e_warmup", tc.e_warmup);
  tc.boundary_epochs = t.value("boundary_epochs", tc.boundary_epochs);
  tc.history_length = t.value("history_length", tc.history_length);
  tc.sigma = t.value("sigma", tc.sigma);
  tc.gamma = t.value("gamma", tc.gamma);
  tc.k_boundary = t.value("k_boundary", tc.k_boundary);
  tc.eps_dbscan = t.value("eps_dbscan", tc.eps_dbscan);
  tc.min_pts = t.value("min_pts", tc.min_pts);
  tc.use_instance_clusters = t.value("use_instance_clusters", tc.use_instance_clusters);
  tc.learning_rate = t.value("learning_rate", tc.learning_rate);
  tc.block_size = t.value("block_size", tc.block_size);
  tc.block_stride = t.value("block_stride", tc.block_stride);
  tc.points_per_block = t.value("points_per_block", tc.points_per_block);
  tc.mask_on_confirm = t.value("mask_on_confirm", tc.mask_on_confirm);
  tc.progressive_band = t.value("progressive_band", tc.progressive_band);
  tc.reset_history_between_phases =
      t.value("reset_history_between_phases", tc.reset_history_between_phases);
  return tc;
}

// Scene lists come either from explicit --scene flags, a single scene file,
// or a manifest json with a "scenes" array (paths relative to the manifest).
std::vector<std::string> scene_paths_from(const std::string& input,
                                          const std::vector<std::string>& explicit_scenes,
                                          const char* manifest_key = "scenes") {
  std::vector<std::string> out = explicit_scenes;
  if (!input.empty()) {
    if (input.size() > 5 && input.substr(input.size() - 5) == ".json") {
      const json manifest = load_json(input);
      if (!manifest.contains(manifest_key))
        throw std::invalid_argument("manifest " + input + " lacks '" + manifest_key + "'");
      const fs::path base = fs::path(input).parent_path();
      for (const auto& s : manifest[manifest_key])
        out.push_back((base / s.get<std::string>()).string());
    } else {
      out.push_back(input);
    }
  }
  if (out.empty()) throw std::invalid_argument("no input scenes given");
  return out;
}

std::string scene_file_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%03d.txt", i);
  return buf;
}

int cmd_synth(const CliOptions& opt, const json& cfg) {
  pnal::SynthSpec spec = synth_spec_from(cfg);
  const std::uint64_t seed = opt.seed.value_or(cfg.value("seed", 1));
  int count = opt.scene_count.value_or(
      cfg.contains("synth") ? cfg["synth"].value("scene_count", 1) : 1);
  spec.validate();
  if (count < 1) throw std::invalid_argument("synth: scene count must be >= 1");
  if (opt.output.empty()) throw std::invalid_argument("synth: --output directory required");

  const auto scenes = pnal::generate_dataset(spec, count, seed);
  const fs::path out_dir = resolve_output(opt.output);
  fs::create_directories(out_dir);
  json manifest;
  manifest["scenes"] = json::array();
  for (int i = 0; i < count; ++i) {
    const std::string name = scene_file_name(i);
    pnal::save_scene((out_dir / name).string(), scenes[i]);
    manifest["scenes"].push_back(name);
  }
  manifest["class_count"] = spec.class_count;
  manifest["spec"] = {{"seed", seed},
                      {"room", {spec.room[0], spec.room[1], spec.room[2]}},
                      {"class_count", spec.class_count},
                      {"instances_per_class", spec.instances_per_class},
                      {"points_per_instance", spec.points_per_instance},
                      {"color_noise", spec.color_noise},
                      {"contact", spec.contact},
                      {"scene_count", count}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << count << " scenes to " << out_dir.string() << "\n";
  return 0;
}

int cmd_inject(const CliOptions& opt, const json& cfg) {
  pnal::NoiseSpec spec = noise_spec_from(cfg);
  if (opt.noise_kind) spec.kind = pnal::noise_kind_from_string(*opt.noise_kind);
  if (opt.tau) spec.tau = *opt.tau;
  if (opt.tau_pair) spec.tau_pair = *opt.tau_pair;
  if (opt.alpha) spec.alpha = *opt.alpha;
  if (opt.beta) spec.beta = *opt.beta;
  spec.seed = opt.seed.value_or(cfg.value("seed", 1));
  if (opt.output.empty()) throw std::invalid_argument("inject: --output directory required");

  const auto paths = scene_paths_from(opt.input, opt.scenes);
  std::vector<pnal::Scene> scenes;
  scenes.reserve(paths.size());
  const int class_count = cfg.value("class_count", 0);
  for (const auto& p : paths) scenes.push_back(pnal::load_scene(p, class_count));
  for (auto& s : scenes) {
    if (!s.has_labels()) throw std::invalid_argument("inject: input scene lacks labels");
  }
  // a common class count across the dataset
  int m = 0;
  for (const auto& s : scenes) m = std::max(m, s.class_count);
  for (auto& s : scenes) s.class_count = m;
  spec.validate(m);

  const int n = static_cast<int>(scenes.size());
  std::vector<std::vector<int>> noisy(n);
  using pnal::NoiseKind;
  const bool needs_instances = spec.kind == NoiseKind::symmetric ||
                               spec.kind == NoiseKind::asymmetric_pairs ||
                               spec.kind == NoiseKind::mixed_asymmetric ||
                               spec.kind == NoiseKind::mixed_instance_boundary;
  if (needs_instances)
    for (const auto& s : scenes)
      if (!s.has_instances())
        throw std::invalid_argument("inject: instance-level noise needs instance ids");

  switch (spec.kind) {
    case NoiseKind::symmetric:
      for (int i = 0; i < n; ++i)
        noisy[i] =
            pnal::inject_symmetric(scenes[i], spec.tau, pnal::derive_seed(spec.seed, "scene", i));
      break;
    case NoiseKind::asymmetric_pairs:
      for (int i = 0; i < n; ++i)
        noisy[i] = pnal::inject_asymmetric_pairs(scenes[i], spec.tau_pair, spec.pairs,
                                                 pnal::derive_seed(spec.seed, "scene", i));
      break;
    case NoiseKind::mixed_asymmetric:
      for (int i = 0; i < n; ++i)
        noisy[i] = pnal::inject_mixed_asymmetric(scenes[i], spec.tau, spec.tau_pair, spec.pairs,
                                                 pnal::derive_seed(spec.seed, "scene", i));
      break;
    case NoiseKind::boundary: {
      const auto res = pnal::inject_dataset_boundary(scenes, spec.alpha, spec.beta, spec.seed);
      noisy = res.labels;
      break;
    }
    case NoiseKind::mixed_instance_boundary: {
      // instance-level first, then boundary noise on the corrupted labels
      std::vector<pnal::Scene> staged = scenes;
      for (int i = 0; i < n; ++i)
        staged[i].labels = pnal::inject_symmetric(scenes[i], spec.tau,
                                                  pnal::derive_seed(spec.seed, "scene", i));
      const auto res = pnal::inject_dataset_boundary(staged, spec.alpha, spec.beta,
                                                     pnal::derive_seed(spec.seed, "stage2"));
      noisy = res.labels;
      break;
    }
  }

  const fs::path out_dir = resolve_output(opt.output);
  fs::create_directories(out_dir);
  json manifest;
  manifest["scenes"] = json::array();
  manifest["clean_scenes"] = json::array();
  manifest["class_count"] = m;
  json reports = json::array();
  long total_flipped = 0;
  for (int i = 0; i < n; ++i) {
    pnal::Scene copy = scenes[i];
    copy.labels = noisy[i];
    const std::string name = scene_file_name(i);
    pnal::save_scene((out_dir / name).string(), copy);
    manifest["scenes"].push_back(name);
    manifest["clean_scenes"].push_back(fs::absolute(paths[i]).lexically_normal().string());

    const bool boundary_like =
        spec.kind == NoiseKind::boundary || spec.kind == NoiseKind::mixed_instance_boundary;
    const double requested = boundary_like ? spec.beta : spec.tau;
    const pnal::NoiseReport rep = boundary_like
                                      ? pnal::make_boundary_report(scenes[i], noisy[i], requested)
                                      : pnal::make_instance_report(scenes[i], noisy[i], requested);
    total_flipped += rep.flipped_points;
    reports.push_back({{"scene", name},
                       {"requested_rate", rep.requested_rate},
                       {"measured_rate", rep.measured_rate},
                       {"flipped_points", rep.flipped_points}});
  }
  manifest["kind"] = pnal::to_string(spec.kind);
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  json agg;
  agg["kind"] = pnal::to_string(spec.kind);
  agg["scenes"] = reports;
  agg["total_flipped_points"] = total_flipped;
  write_text(out_dir / "noise_report.json", agg.dump(2) + "\n");
  std::cout << "injected " << pnal::to_string(spec.kind) << " noise into " << n << " scenes ("
            << total_flipped << " points flipped)\n";
  return 0;
}

int cmd_cluster(const CliOptions& opt, const json& cfg) {
  if (opt.input.empty()) throw std::invalid_argument("cluster: --input scene file required");
  const pnal::Scene scene = pnal::load_scene(opt.input, cfg.value("class_count", 0));
  pnal::ClusterSet clusters;
  if (opt.use_instances) {
    clusters = pnal::clusters_from_instances(scene);
  } else {
    const double eps = opt.eps.value_or(0.018);
    const int min_pts = opt.min_pts.value_or(10);
    clusters = pnal::dbscan_cluster(scene, eps, min_pts);
  }
  if (opt.output.empty()) {
    pnal::write_cluster_dump(std::cout, clusters);
  } else {
    const fs::path out = resolve_output(opt.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream f(out, std::ios::binary);
    if (!f) throw pnal::IoError("cannot write " + out.string());
    pnal::write_cluster_dump(f, clusters);
  }
  std::cerr << clusters.count() << " clusters over " << scene.size() << " points\n";
  return 0;
}

int cmd_train(const CliOptions& opt, const json& cfg) {
  pnal::TrainConfig tc = train_config_from(cfg);
  tc.seed = opt.seed.value_or(cfg.value("seed", 1));
  tc.workers = opt.workers.value_or(cfg.value("workers", env_workers()));
  if (opt.pipeline) tc.pipeline = *opt.pipeline;
  if (opt.total_epochs) tc.total_epochs = *opt.total_epochs;
  if (opt.e_warmup) tc.e_warmup = *opt.e_warmup;
  if (opt.sigma) tc.sigma = *opt.sigma;
  if (opt.gamma) tc.gamma = *opt.gamma;
  if (opt.lr) tc.learning_rate = *opt.lr;
  if (opt.eps) tc.eps_dbscan = *opt.eps;
  if (opt.min_pts) tc.min_pts = *opt.min_pts;
  if (opt.k_boundary) tc.k_boundary = *opt.k_boundary;
  if (opt.use_instances) tc.use_instance_clusters = true;
  if (opt.no_progressive) tc.progressive_band = false;
  if (opt.dump_bands || opt.dump_epoch_labels) tc.record_label_history = true;
  tc.validate();  // reject before writing anything
  if (opt.output.empty()) throw std::invalid_argument("train: --output directory required");

  const int class_count = cfg.value("class_count", 0);
  const auto train_paths = scene_paths_from(opt.input, opt.scenes);

  pnal::RunInput input;
  for (const auto& p : train_paths) input.train.push_back(pnal::load_scene(p, class_count));

  // clean references: explicit flag, or the inject manifest's clean_scenes
  std::vector<std::string> clean_paths;
  if (!opt.clean_input.empty()) {
    clean_paths = scene_paths_from(opt.clean_input, {});
  } else if (!opt.input.empty() && opt.input.size() > 5 &&
             opt.input.substr(opt.input.size() - 5) == ".json") {
    const json manifest = load_json(opt.input);
    if (manifest.contains("clean_scenes")) {
      const fs::path base = fs::path(opt.input).parent_path();
      for (const auto& s : manifest["clean_scenes"]) {
        fs::path p(s.get<std::string>());
        clean_paths.push_back(p.is_absolute() ? p.string() : (base / p).string());
      }
    }
  }
  if (!clean_paths.empty()) {
    if (clean_paths.size() != train_paths.size())
      throw std::invalid_argument("train: clean reference count != training scene count");
    for (const auto& p : clean_paths)
      input.clean_labels.push_back(pnal::load_scene(p, class_count).labels);
  }
  if (!opt.test_input.empty())
    for (const auto& p : scene_paths_from(opt.test_input, {}))
      input.test.push_back(pnal::load_scene(p, class_count));

  // a common class count across everything
  int m = class_count;
  for (const auto& s : input.train) m = std::max(m, s.class_count);
  for (const auto& s : input.test) m = std::max(m, s.class_count);
  for (auto& s : input.train) s.class_count = m;
  for (auto& s : input.test) s.class_count = m;

  const std::vector<pnal::Scene> originals = input.train;  // for cleaned exports
  pnal::RunResult result = pnal::run_pipeline(tc, std::move(input));

  const fs::path out_dir = resolve_output(opt.output);
  fs::create_directories(out_dir);
  fs::create_directories(out_dir / "cleaned");
  fs::create_directories(out_dir / "masks");
  fs::create_directories(out_dir / "corrections");

  std::string epochs_log;
  for (const auto& log : result.epochs) epochs_log += log.to_json() + "\n";
  write_text(out_dir / "epochs.jsonl", epochs_log);
  write_text(out_dir / "report.json", result.report.to_json() + "\n");

  for (std::size_t i = 0; i < originals.size(); ++i) {
    pnal::Scene cleaned = originals[i];
    cleaned.labels = result.cleaned_labels[i];
    pnal::save_scene((out_dir / "cleaned" / scene_file_name(static_cast<int>(i))).string(),
                     cleaned);
    std::string mask_text;
    for (bool b : result.replaced_masks[i]) mask_text += b ? "1\n" : "0\n";
    write_text(out_dir / "masks" / scene_file_name(static_cast<int>(i)), mask_text);
  }

  {
    std::vector<std::string> per_scene(originals.size());
    for (const auto& ev : result.corrections) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%d %d %d %d %d\n", ev.epoch, ev.cluster, ev.old_label,
                    ev.new_label, ev.reliable_count);
      per_scene[ev.scene] += buf;
    }
    for (std::size_t i = 0; i < per_scene.size(); ++i)
      write_text(out_dir / "corrections" / (scene_file_name(static_cast<int>(i)) + ".log"),
                 per_scene[i]);
  }

  if (opt.dump_epoch_labels) {
    for (const auto& snap : result.snapshots) {
      char epoch_dir[32];
      std::snprintf(epoch_dir, sizeof(epoch_dir), "epoch_%03d", snap.epoch);
      fs::create_directories(out_dir / "epoch_labels" / epoch_dir);
      for (std::size_t i = 0; i < snap.labels.size(); ++i) {
        pnal::Scene staged = originals[i];
        staged.labels = snap.labels[i];
        pnal::save_scene(
            (out_dir / "epoch_labels" / epoch_dir / scene_file_name(static_cast<int>(i)))
                .string(),
            staged);
      }
    }
  }

  if (opt.dump_bands) {
    fs::create_directories(out_dir / "bands");
    std::vector<std::string> per_scene(originals.size());
    for (const auto& snap : result.snapshots) {
      if (snap.band_flags.empty()) continue;
      for (std::size_t s = 0; s < snap.band_flags.size(); ++s)
        for (std::size_t p = 0; p < snap.band_flags[s].size(); ++p)
          if (snap.band_flags[s][p])
            per_scene[s] += std::to_string(snap.epoch) + " " + std::to_string(p) + "\n";
    }
    for (std::size_t i = 0; i < per_scene.size(); ++i)
      write_text(out_dir / "bands" / (scene_file_name(static_cast<int>(i)) + ".log"),
                 per_scene[i]);
  }

  std::cout << result.report.to_table();
  return 0;
}

int cmd_eval(const CliOptions& opt, const json& cfg) {
  if (opt.pred_path.empty() || opt.gt_path.empty())
    throw std::invalid_argument("eval: --pred and --gt scene files required");
  const int class_count = cfg.value("class_count", 0);
  const pnal::Scene pred = pnal::load_scene(opt.pred_path, class_count);
  const pnal::Scene gt = pnal::load_scene(opt.gt_path, class_count);
  if (!pred.has_labels() || !gt.has_labels())
    throw std::invalid_argument("eval: both files need label columns");
  if (pred.size() != gt.size()) throw std::invalid_argument("eval: point counts differ");
  // lines must align point-by-point, not merely agree in count
  for (int i = 0; i < pred.size(); ++i)
    for (int a = 0; a < 3; ++a)
      if (std::abs(pred.positions[i][a] - gt.positions[i][a]) > 1e-6)
        throw std::invalid_argument("eval: files are not aligned line-by-line (positions differ)");

  const int m = std::max(pred.class_count, gt.class_count);
  pnal::MetricReport report;
  report.oa = pnal::overall_accuracy(pred.labels, gt.labels);
  const pnal::IouResult iou = pnal::mean_iou(pred.labels, gt.labels, m);
  report.miou = iou.miou;
  report.per_class_iou = iou.per_class;

  std::set<int> distinct(gt.labels.begin(), gt.labels.end());
  if (distinct.size() >= 2) {
    const int k = std::min(opt.k_boundary.value_or(20), gt.size());
    pnal::SpatialIndex index(gt);
    const auto band = pnal::extract_boundary(gt.labels, index, k);
    const auto ei = pnal::edge_inner_accuracy(pred.labels, gt.labels, band);
    report.oa_edge = ei.oa_edge;
    report.oa_in = ei.oa_in;
  }

  std::cout << report.to_table();
  if (!opt.output.empty()) {
    const fs::path out = resolve_output(opt.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_text(out, report.to_json() + "\n");
  }
  return 0;
}

int cmd_stats(const CliOptions& opt, const json& cfg) {
  if (opt.cleaned_path.empty() || opt.mask_path.empty() || opt.clean_path.empty() ||
      opt.noisy_path.empty())
    throw std::invalid_argument("stats: --cleaned, --mask, --clean and --noisy required");
  const int class_count = cfg.value("class_count", 0);
  const pnal::Scene cleaned = pnal::load_scene(opt.cleaned_path, class_count);
  const pnal::Scene clean = pnal::load_scene(opt.clean_path, class_count);
  const pnal::Scene noisy = pnal::load_scene(opt.noisy_path, class_count);

  std::vector<bool> mask;
  {
    std::ifstream in(opt.mask_path);
    if (!in) throw pnal::IoError("cannot open mask file: " + opt.mask_path);
    int v;
    while (in >> v) mask.push_back(v != 0);
  }
  const pnal::CorrectionStats stats =
      pnal::correction_stats(cleaned.labels, mask, clean.labels, noisy.labels);
  json j;
  j["replaced_fraction"] = stats.replaced_fraction;
  if (stats.true_correction_fraction)
    j["true_correction_fraction"] = *stats.true_correction_fraction;
  std::cout << j.dump(2) << "\n";
  if (!opt.output.empty()) {
    const fs::path out = resolve_output(opt.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_text(out, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pnal: noise-adaptive label cleaning for point cloud segmentation"};
  app.require_subcommand(1);
  app.fallthrough();  // --config/--seed/--workers may follow the subcommand
  CliOptions opt;

  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--seed", opt.seed, "root seed (overrides config)");
  app.add_option("--workers", opt.workers, "worker cap (results are worker-count independent)");

  auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
  synth->add_option("--output,-o", opt.output, "output directory")->required();
  synth->add_option("--count", opt.scene_count, "scene count");

  auto* inject = app.add_subcommand("inject", "inject label noise");
  inject->add_option("--input,-i", opt.input, "scene file or manifest.json");
  inject->add_option("--scene", opt.scenes, "explicit scene file (repeatable)");
  inject->add_option("--output,-o", opt.output, "output directory")->required();
  inject->add_option("--kind", opt.noise_kind, "noise kind");
  inject->add_option("--tau", opt.tau, "instance flip rate");
  inject->add_option("--tau-pair", opt.tau_pair, "within-pair flip rate");
  inject->add_option("--alpha", opt.alpha, "fraction of scenes for boundary noise");
  inject->add_option("--beta", opt.beta, "boundary noise level");

  auto* cluster = app.add_subcommand("cluster", "cluster one scene");
  cluster->add_option("--input,-i", opt.input, "scene file")->required();
  cluster->add_option("--output,-o", opt.output, "dump file (default: stdout)");
  cluster->add_option("--eps", opt.eps, "density radius in 6-d feature space");
  cluster->add_option("--min-pts", opt.min_pts, "density threshold");
  cluster->add_flag("--instances", opt.use_instances, "use ground-truth instances");

  auto* train = app.add_subcommand("train", "run a cleaning pipeline");
  train->add_option("--input,-i", opt.input, "training scenes (manifest or file)");
  train->add_option("--scene", opt.scenes, "explicit scene file (repeatable)");
  train->add_option("--clean", opt.clean_input, "clean reference scenes (manifest or file)");
  train->add_option("--test", opt.test_input, "clean test scenes (manifest or file)");
  train->add_option("--output,-o", opt.output, "output directory")->required();
  train->add_option("--pipeline", opt.pipeline, "pnal | pnal_boundary | mixed | ce");
  train->add_option("--epochs", opt.total_epochs, "total epochs");
  train->add_option("--warmup", opt.e_warmup, "warm-up epochs (-1 = auto)");
  train->add_option("--sigma", opt.sigma, "confidence threshold");
  train->add_option("--gamma", opt.gamma, "vote relaxation");
  train->add_option("--lr", opt.lr, "learning rate");
  train->add_option("--eps", opt.eps, "clustering radius");
  train->add_option("--min-pts", opt.min_pts, "clustering density threshold");
  train->add_option("--k", opt.k_boundary, "boundary neighbor count");
  train->add_flag("--instances", opt.use_instances, "correct on ground-truth instances");
  train->add_flag("--no-progressive", opt.no_progressive, "freeze the boundary band at epoch 1");
  train->add_flag("--dump-bands", opt.dump_bands, "write per-epoch band dumps");
  train->add_flag("--dump-epoch-labels", opt.dump_epoch_labels,
                  "export the cleaned labels of every epoch as scene files");

  auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval->add_option("--pred", opt.pred_path, "prediction scene file")->required();
  eval->add_option("--gt", opt.gt_path, "ground-truth scene file")->required();
  eval->add_option("--k", opt.k_boundary, "boundary neighbor count for oa_edge/oa_in");
  eval->add_option("--output,-o", opt.output, "report json path");

  auto* stats = app.add_subcommand("stats", "correction statistics");
  stats->add_option("--cleaned", opt.cleaned_path, "cleaned scene file")->required();
  stats->add_option("--mask", opt.mask_path, "replaced-mask file (0/1 lines)")->required();
  stats->add_option("--clean", opt.clean_path, "clean ground-truth scene file")->required();
  stats->add_option("--noisy", opt.noisy_path, "initial noisy scene file")->required();
  stats->add_option("--output,-o", opt.output, "report json path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    json cfg = json::object();
    if (!opt.config_path.empty()) cfg = load_json(opt.config_path);
    if (synth->parsed()) return cmd_synth(opt, cfg);
    if (inject->parsed()) return cmd_inject(opt, cfg);
    if (cluster->parsed()) return cmd_cluster(opt, cfg);
    if (train->parsed()) return cmd_train(opt, cfg);
    if (eval->parsed()) return cmd_eval(opt, cfg);
    if (stats->parsed()) return cmd_stats(opt, cfg);
  } catch (const pnal::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
