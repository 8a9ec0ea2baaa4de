#include <set>

#include "doctest.h"
#include "pnal/metrics.hpp"
#include "pnal/rng.hpp"

using namespace pnal;

namespace {

BoundaryBand band_from_flags(const std::vector<bool>& flags) {
  BoundaryBand band;
  band.in_band = flags;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) band.members.push_back(static_cast<int>(i));
  return band;
}

}  // namespace

TEST_CASE("overall accuracy basics") {
  CHECK(overall_accuracy({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(overall_accuracy({1, 2, 3, 4}, {1, 2, 3, 0}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(overall_accuracy({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("overall accuracy matches an independent count on random fixtures") {
  Rng rng(1);
  std::vector<int> pred(1000), gt(1000);
  for (int i = 0; i < 1000; ++i) {
    pred[i] = static_cast<int>(rng.uniform_int(5));
    gt[i] = static_cast<int>(rng.uniform_int(5));
  }
  long hits = 0;
  for (int i = 0; i < 1000; ++i) hits += pred[i] == gt[i];
  CHECK(overall_accuracy(pred, gt) == doctest::Approx(hits / 1000.0));
}

TEST_CASE("mean iou: perfect, swapped, and confusion-matrix oracle") {
  CHECK(mean_iou({0, 1, 0}, {0, 1, 0}, 2).miou == doctest::Approx(1.0));
  CHECK(mean_iou({1, 0, 1}, {0, 1, 0}, 2).miou == doctest::Approx(0.0));

  // 3-class fixture vs a hand-built confusion matrix
  const std::vector<int> pred = {0, 0, 1, 1, 2, 2, 0, 1};
  const std::vector<int> gt = {0, 1, 1, 1, 2, 0, 0, 2};
  long tp[3] = {}, fp[3] = {}, fn[3] = {};
  for (int i = 0; i < 8; ++i) {
    if (pred[i] == gt[i]) ++tp[pred[i]];
    else {
      ++fp[pred[i]];
      ++fn[gt[i]];
    }
  }
  const IouResult r = mean_iou(pred, gt, 3);
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    const double iou = static_cast<double>(tp[c]) / (tp[c] + fp[c] + fn[c]);
    CHECK(r.per_class[c] == doctest::Approx(iou));
    sum += iou;
  }
  CHECK(r.miou == doctest::Approx(sum / 3.0));
}

TEST_CASE("classes absent from both pred and gt are excluded from the mean") {
  const IouResult r = mean_iou({0, 1}, {0, 1}, 5);
  CHECK(r.per_class[0] == doctest::Approx(1.0));
  CHECK(r.per_class[1] == doctest::Approx(1.0));
  CHECK(r.per_class[3] == -1.0);
  CHECK(r.miou == doctest::Approx(1.0));
}

TEST_CASE("edge and inner accuracy split by the band") {
  const std::vector<bool> flags = {true, true, false, false};
  const BoundaryBand band = band_from_flags(flags);

  const auto perfect = edge_inner_accuracy({1, 2, 3, 4}, {1, 2, 3, 4}, band);
  CHECK(*perfect.oa_edge == doctest::Approx(1.0));
  CHECK(*perfect.oa_in == doctest::Approx(1.0));

  // errors only inside the band
  const auto band_errors = edge_inner_accuracy({9, 2, 3, 4}, {1, 2, 3, 4}, band);
  CHECK(*band_errors.oa_edge == doctest::Approx(0.5));
  CHECK(*band_errors.oa_in == doctest::Approx(1.0));

  const auto empty = edge_inner_accuracy({1, 2}, {1, 2}, band_from_flags({false, false}));
  CHECK_FALSE(empty.oa_edge.has_value());
  CHECK(*empty.oa_in == doctest::Approx(1.0));
}

TEST_CASE("oa decomposes exactly into the band-weighted combination") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_int(200));
    std::vector<int> pred(n), gt(n);
    std::vector<bool> flags(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.uniform_int(4));
      gt[i] = static_cast<int>(rng.uniform_int(4));
      flags[i] = rng.uniform() < 0.4;
    }
    const BoundaryBand band = band_from_flags(flags);
    const auto ei = edge_inner_accuracy(pred, gt, band);
    const double w = static_cast<double>(band.size()) / n;
    const double edge = ei.oa_edge.value_or(0.0);
    const double inner = ei.oa_in.value_or(0.0);
    CHECK(overall_accuracy(pred, gt) ==
          doctest::Approx(w * edge + (1.0 - w) * inner).epsilon(1e-12));
  }
}

TEST_CASE("correction stats") {
  // mask all false: fraction 0 and no true-correction value
  const auto none = correction_stats({1, 2, 3}, {false, false, false}, {1, 2, 3}, {1, 2, 3});
  CHECK(none.replaced_fraction == doctest::Approx(0.0));
  CHECK_FALSE(none.true_correction_fraction.has_value());

  // everything replaced and correct
  const auto all = correction_stats({1, 2}, {true, true}, {1, 2}, {9, 9});
  CHECK(all.replaced_fraction == doctest::Approx(1.0));
  CHECK(*all.true_correction_fraction == doctest::Approx(1.0));

  // 3 of 10 masked, 2 of them correct
  std::vector<int> cleaned(10, 0), clean(10, 0), noisy(10, 5);
  std::vector<bool> mask(10, false);
  mask[1] = mask[4] = mask[7] = true;
  cleaned[7] = 3;  // wrong correction
  const auto partial = correction_stats(cleaned, mask, clean, noisy);
  CHECK(partial.replaced_fraction == doctest::Approx(0.3));
  CHECK(*partial.true_correction_fraction == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(correction_stats({1}, {true, false}, {1}, {1}), std::invalid_argument);
}

TEST_CASE("metrics are invariant under a consistent permutation") {
  Rng rng(3);
  const int n = 300;
  std::vector<int> pred(n), gt(n), perm(n);
  for (int i = 0; i < n; ++i) {
    pred[i] = static_cast<int>(rng.uniform_int(6));
    gt[i] = static_cast<int>(rng.uniform_int(6));
    perm[i] = i;
  }
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_int(static_cast<std::uint64_t>(i + 1))]);
  std::vector<int> pred_p(n), gt_p(n);
  for (int i = 0; i < n; ++i) {
    pred_p[i] = pred[perm[i]];
    gt_p[i] = gt[perm[i]];
  }
  CHECK(overall_accuracy(pred, gt) == doctest::Approx(overall_accuracy(pred_p, gt_p)));
  CHECK(mean_iou(pred, gt, 6).miou == doctest::Approx(mean_iou(pred_p, gt_p, 6).miou));
}

TEST_CASE("metric report serializes fixed keys") {
  MetricReport r;
  r.oa = 0.5;
  r.miou = 0.25;
  r.replaced_fraction = 0.9;
  const std::string j = r.to_json();
  CHECK(j.find("\"oa\"") != std::string::npos);
  CHECK(j.find("\"miou\"") != std::string::npos);
  CHECK(j.find("\"replaced_fraction\"") != std::string::npos);
  CHECK(j.find("oa_edge") == std::string::npos);
}
