// Python bindings for the main operations: scene construction/IO, synthetic
// generation, clustering, noise injection, cleaning pipelines and metrics.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pnal/cluster.hpp"
#include "pnal/metrics.hpp"
#include "pnal/noise.hpp"
#include "pnal/scene.hpp"
#include "pnal/spatial_index.hpp"
#include "pnal/synthgen.hpp"
#include "pnal/trainer.hpp"

namespace py = pybind11;
using pnal::Scene;

namespace {

Scene scene_from_arrays(py::array_t<double> positions, py::array_t<double> colors,
                        py::object labels, py::object instance_ids, int class_count) {
  auto pos = positions.unchecked<2>();
  auto col = colors.unchecked<2>();
  if (pos.shape(1) != 3 || col.shape(1) != 3)
    throw std::invalid_argument("positions and colors must be (n, 3)");
  if (pos.shape(0) != col.shape(0))
    throw std::invalid_argument("positions and colors disagree on point count");
  Scene scene;
  const py::ssize_t n = pos.shape(0);
  scene.positions.reserve(n);
  scene.colors.reserve(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    scene.positions.push_back({pos(i, 0), pos(i, 1), pos(i, 2)});
    scene.colors.push_back({col(i, 0), col(i, 1), col(i, 2)});
  }
  if (!labels.is_none()) scene.labels = labels.cast<std::vector<int>>();
  if (!instance_ids.is_none()) scene.instance_ids = instance_ids.cast<std::vector<int>>();
  scene.class_count = class_count;
  if (scene.has_labels() && class_count == 0) {
    int max_label = 0;
    for (int l : scene.labels) max_label = std::max(max_label, l);
    scene.class_count = std::max(2, max_label + 1);
  }
  scene.validate();
  return scene;
}

py::array_t<double> vec3s_to_array(const std::vector<pnal::Vec3>& rows) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(3)});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int a = 0; a < 3; ++a) w(i, a) = rows[i][a];
  return out;
}

pnal::TrainConfig config_from_dict(const py::dict& d) {
  pnal::TrainConfig c;
  for (auto item : d) {
    const std::string key = py::str(item.first);
    const py::handle v = item.second;
    if (key == "pipeline") c.pipeline = v.cast<std::string>();
    else if (key == "total_epochs") c.total_epochs = v.cast<int>();
    else if (key == "e_warmup") c.e_warmup = v.cast<int>();
    else if (key == "boundary_epochs") c.boundary_epochs = v.cast<int>();
    else if (key == "history_length") c.history_length = v.cast<int>();
    else if (key == "sigma") c.sigma = v.cast<double>();
    else if (key == "gamma") c.gamma = v.cast<double>();
    else if (key == "k_boundary") c.k_boundary = v.cast<int>();
    else if (key == "eps_dbscan") c.eps_dbscan = v.cast<double>();
    else if (key == "min_pts") c.min_pts = v.cast<int>();
    else if (key == "use_instance_clusters") c.use_instance_clusters = v.cast<bool>();
    else if (key == "learning_rate") c.learning_rate = v.cast<double>();
    else if (key == "block_size") c.block_size = v.cast<double>();
    else if (key == "block_stride") c.block_stride = v.cast<double>();
    else if (key == "points_per_block") c.points_per_block = v.cast<int>();
    else if (key == "seed") c.seed = v.cast<std::uint64_t>();
    else if (key == "mask_on_confirm") c.mask_on_confirm = v.cast<bool>();
    else if (key == "progressive_band") c.progressive_band = v.cast<bool>();
    else if (key == "reset_history_between_phases")
      c.reset_history_between_phases = v.cast<bool>();
    else if (key == "workers") c.workers = v.cast<int>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return c;
}

py::dict report_to_dict(const pnal::MetricReport& r) {
  py::dict d;
  d["oa"] = r.oa;
  d["miou"] = r.miou;
  if (r.oa_edge) d["oa_edge"] = *r.oa_edge;
  if (r.oa_in) d["oa_in"] = *r.oa_in;
  if (!r.per_class_iou.empty()) d["per_class_iou"] = r.per_class_iou;
  if (r.replaced_fraction) d["replaced_fraction"] = *r.replaced_fraction;
  if (r.true_correction_fraction) d["true_correction_fraction"] = *r.true_correction_fraction;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Noise-adaptive label cleaning for 3d point cloud segmentation";

  py::class_<Scene>(m, "Scene")
      .def(py::init(&scene_from_arrays), py::arg("positions"), py::arg("colors"),
           py::arg("labels") = py::none(), py::arg("instance_ids") = py::none(),
           py::arg("class_count") = 0)
      .def_property_readonly("positions",
                             [](const Scene& s) { return vec3s_to_array(s.positions); })
      .def_property_readonly("colors", [](const Scene& s) { return vec3s_to_array(s.colors); })
      .def_property_readonly("labels", [](const Scene& s) { return s.labels; })
      .def_property_readonly("instance_ids", [](const Scene& s) { return s.instance_ids; })
      .def_readwrite("class_count", &Scene::class_count)
      .def("with_labels",
           [](const Scene& s, const std::vector<int>& labels) {
             Scene out = s;
             out.labels = labels;
             out.validate();
             return out;
           })
      .def("__len__", &Scene::size);

  m.def("load_scene", py::overload_cast<const std::string&, int>(&pnal::load_scene),
        py::arg("path"), py::arg("class_count") = 0);
  m.def("save_scene", py::overload_cast<const std::string&, const Scene&>(&pnal::save_scene),
        py::arg("path"), py::arg("scene"));

  m.def(
      "generate_scene",
      [](std::uint64_t seed, std::vector<double> room, int class_count, int instances_per_class,
         int points_per_instance, double color_noise, bool contact) {
        pnal::SynthSpec spec;
        spec.seed = seed;
        if (room.size() == 3) spec.room = {room[0], room[1], room[2]};
        spec.class_count = class_count;
        spec.instances_per_class = instances_per_class;
        spec.points_per_instance = points_per_instance;
        spec.color_noise = color_noise;
        spec.contact = contact;
        return pnal::generate_scene(spec);
      },
      py::arg("seed") = 1, py::arg("room") = std::vector<double>{2.5, 2.5, 1.2},
      py::arg("class_count") = 6, py::arg("instances_per_class") = 2,
      py::arg("points_per_instance") = 500, py::arg("color_noise") = 0.02,
      py::arg("contact") = true);

  m.def("dbscan", &pnal::dbscan_cluster, py::arg("scene"), py::arg("eps") = 0.018,
        py::arg("min_pts") = 10);
  py::class_<pnal::ClusterSet>(m, "ClusterSet")
      .def_property_readonly("cluster_of", [](const pnal::ClusterSet& c) { return c.cluster_of; })
      .def_property_readonly("count", &pnal::ClusterSet::count)
      .def("members", &pnal::ClusterSet::cluster_members, py::arg("cluster_id"));

  m.def(
      "knn",
      [](const Scene& scene, int query_id, int k) {
        pnal::SpatialIndex index(scene);
        return index.knn(query_id, k);
      },
      py::arg("scene"), py::arg("query_id"), py::arg("k"));

  m.def("inject_symmetric", &pnal::inject_symmetric, py::arg("scene"), py::arg("tau"),
        py::arg("seed"));
  m.def("inject_asymmetric_pairs", &pnal::inject_asymmetric_pairs, py::arg("scene"),
        py::arg("tau_pair"), py::arg("pairs"), py::arg("seed"));
  m.def("inject_mixed_asymmetric", &pnal::inject_mixed_asymmetric, py::arg("scene"),
        py::arg("tau"), py::arg("tau_pair"), py::arg("pairs"), py::arg("seed"));
  m.def("inject_boundary", &pnal::inject_boundary, py::arg("scene"), py::arg("beta"),
        py::arg("seed"));

  m.def("overall_accuracy", &pnal::overall_accuracy, py::arg("pred"), py::arg("gt"));
  m.def(
      "mean_iou",
      [](const std::vector<int>& pred, const std::vector<int>& gt, int class_count) {
        const auto r = pnal::mean_iou(pred, gt, class_count);
        return py::make_tuple(r.miou, r.per_class);
      },
      py::arg("pred"), py::arg("gt"), py::arg("class_count"));
  m.def(
      "edge_inner_accuracy",
      [](const Scene& gt_scene, const std::vector<int>& pred, int k) {
        pnal::SpatialIndex index(gt_scene);
        const auto band = pnal::extract_boundary(gt_scene.labels, index, k);
        const auto ei = pnal::edge_inner_accuracy(pred, gt_scene.labels, band);
        py::dict d;
        if (ei.oa_edge) d["oa_edge"] = *ei.oa_edge;
        if (ei.oa_in) d["oa_in"] = *ei.oa_in;
        return d;
      },
      py::arg("gt_scene"), py::arg("pred"), py::arg("k") = 20);

  m.def(
      "run_pipeline",
      [](const std::vector<Scene>& train, const py::dict& config,
         const std::vector<std::vector<int>>& clean_labels, const std::vector<Scene>& test) {
        pnal::TrainConfig c = config_from_dict(config);
        pnal::RunInput input;
        input.train = train;
        input.clean_labels = clean_labels;
        input.test = test;
        pnal::RunResult r = pnal::run_pipeline(c, std::move(input));
        py::dict out;
        out["report"] = report_to_dict(r.report);
        out["cleaned_labels"] = r.cleaned_labels;
        std::vector<std::vector<int>> masks;
        masks.reserve(r.replaced_masks.size());
        for (const auto& m2 : r.replaced_masks) masks.emplace_back(m2.begin(), m2.end());
        out["replaced_masks"] = masks;
        py::list epochs;
        for (const auto& e : r.epochs) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["phase"] = e.phase;
          d["loss"] = e.loss;
          d["replaced_fraction"] = e.replaced_fraction;
          if (e.true_correction_fraction)
            d["true_correction_fraction"] = *e.true_correction_fraction;
          d["train_oa"] = e.train_oa;
          epochs.append(d);
        }
        out["epochs"] = epochs;
        return out;
      },
      py::arg("train"), py::arg("config") = py::dict(),
      py::arg("clean_labels") = std::vector<std::vector<int>>{},
      py::arg("test") = std::vector<Scene>{});
}
