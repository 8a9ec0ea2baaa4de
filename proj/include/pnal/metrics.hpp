#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pnal/boundary.hpp"

namespace pnal {

struct MetricReport {
  double oa = 0.0;
  double miou = 0.0;
  std::optional<double> oa_edge;
  std::optional<double> oa_in;
  std::vector<double> per_class_iou;  // NaN-free; absent classes carry -1
  std::optional<double> replaced_fraction;
  std::optional<double> true_correction_fraction;

  std::string to_json() const;
  std::string to_table() const;
};

// Fraction of matching ids.
double overall_accuracy(const std::vector<int>& pred, const std::vector<int>& gt);

struct IouResult {
  double miou = 0.0;
  std::vector<double> per_class;  // -1 marks classes absent from pred and gt
};

// Per-class IoU = TP / (TP + FP + FN); classes absent from both pred and gt
// are excluded from the mean.
IouResult mean_iou(const std::vector<int>& pred, const std::vector<int>& gt, int class_count);

struct EdgeInnerAccuracy {
  std::optional<double> oa_edge;  // absent when the band is empty
  std::optional<double> oa_in;    // absent when the band covers every point
};

// Accuracy over the band (computed from ground-truth labels) and over its
// complement.
EdgeInnerAccuracy edge_inner_accuracy(const std::vector<int>& pred, const std::vector<int>& gt,
                                      const BoundaryBand& band);

struct CorrectionStats {
  double replaced_fraction = 0.0;
  std::optional<double> true_correction_fraction;  // absent when nothing was replaced
};

// replaced_fraction = mean of the replaced mask; true_correction_fraction =
// accuracy of the cleaned labels against the clean ground truth among masked
// points (confirming an already-correct label counts as a true correction).
CorrectionStats correction_stats(const std::vector<int>& cleaned,
                                 const std::vector<bool>& replaced,
                                 const std::vector<int>& clean_gt,
                                 const std::vector<int>& noisy_start);

}  // namespace pnal
