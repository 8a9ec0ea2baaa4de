#include "pnal/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pnal {

double overall_accuracy(const std::vector<int>& pred, const std::vector<int>& gt) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("overall_accuracy: length mismatch");
  if (pred.empty()) throw std::invalid_argument("overall_accuracy: empty input");
  long hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == gt[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

IouResult mean_iou(const std::vector<int>& pred, const std::vector<int>& gt, int class_count) {
  if (pred.size() != gt.size()) throw std::invalid_argument("mean_iou: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mean_iou: empty input");
  if (class_count < 2) throw std::invalid_argument("mean_iou: class count must be >= 2");
  std::vector<long> tp(class_count, 0), fp(class_count, 0), fn(class_count, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i];
    const int g = gt[i];
    if (p < 0 || p >= class_count || g < 0 || g >= class_count)
      throw std::invalid_argument("mean_iou: label outside class range");
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  IouResult out;
  out.per_class.assign(class_count, -1.0);
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < class_count; ++c) {
    const long denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;  // absent from both pred and gt
    out.per_class[c] = static_cast<double>(tp[c]) / static_cast<double>(denom);
    sum += out.per_class[c];
    ++counted;
  }
  out.miou = counted > 0 ? sum / counted : 0.0;
  return out;
}

EdgeInnerAccuracy edge_inner_accuracy(const std::vector<int>& pred, const std::vector<int>& gt,
                                      const BoundaryBand& band) {
  if (pred.size() != gt.size() || pred.size() != band.in_band.size())
    throw std::invalid_argument("edge_inner_accuracy: length mismatch");
  long edge_hits = 0, edge_total = 0, in_hits = 0, in_total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (band.in_band[i]) {
      ++edge_total;
      if (pred[i] == gt[i]) ++edge_hits;
    } else {
      ++in_total;
      if (pred[i] == gt[i]) ++in_hits;
    }
  }
  EdgeInnerAccuracy out;
  if (edge_total > 0)
    out.oa_edge = static_cast<double>(edge_hits) / static_cast<double>(edge_total);
  if (in_total > 0) out.oa_in = static_cast<double>(in_hits) / static_cast<double>(in_total);
  return out;
}

CorrectionStats correction_stats(const std::vector<int>& cleaned,
                                 const std::vector<bool>& replaced,
                                 const std::vector<int>& clean_gt,
                                 const std::vector<int>& noisy_start) {
  const std::size_t n = cleaned.size();
  if (replaced.size() != n || clean_gt.size() != n || noisy_start.size() != n)
    throw std::invalid_argument("correction_stats: length mismatch");
  if (n == 0) throw std::invalid_argument("correction_stats: empty input");
  long masked = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!replaced[i]) continue;
    ++masked;
    if (cleaned[i] == clean_gt[i]) ++correct;
  }
  CorrectionStats out;
  out.replaced_fraction = static_cast<double>(masked) / static_cast<double>(n);
  if (masked > 0)
    out.true_correction_fraction = static_cast<double>(correct) / static_cast<double>(masked);
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["oa"] = oa;
  j["miou"] = miou;
  if (oa_edge) j["oa_edge"] = *oa_edge;
  if (oa_in) j["oa_in"] = *oa_in;
  if (!per_class_iou.empty()) j["per_class_iou"] = per_class_iou;
  if (replaced_fraction) j["replaced_fraction"] = *replaced_fraction;
  if (true_correction_fraction) j["true_correction_fraction"] = *true_correction_fraction;
  return j.dump(2);
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  char buf[96];
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "  %-26s %.4f\n", name, v);
    out << buf;
  };
  row("oa", oa);
  row("miou", miou);
  if (oa_edge) row("oa_edge", *oa_edge);
  if (oa_in) row("oa_in", *oa_in);
  if (replaced_fraction) row("replaced_fraction", *replaced_fraction);
  if (true_correction_fraction) row("true_correction_fraction", *true_correction_fraction);
  for (std::size_t c = 0; c < per_class_iou.size(); ++c) {
    if (per_class_iou[c] < 0) continue;
    std::snprintf(buf, sizeof(buf), "  iou[%zu]%*s %.4f\n", c, c < 10 ? 20 : 19, "",
                  per_class_iou[c]);
    out << buf;
  }
  return out.str();
}

}  // namespace pnal
