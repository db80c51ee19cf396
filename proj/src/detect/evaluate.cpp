#include "vgt/detect/evaluate.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "vgt/doc/page.h"

namespace vgt::detect {

using nlohmann::json;

double iou(const BoxF& a, const BoxF& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = iw > 0 && ih > 0 ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::vector<std::size_t> nms_indices(const std::vector<Detection>& dets, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool keep = true;
    for (std::size_t k : kept) {
      if (dets[k].category == dets[i].category && iou(dets[k].box, dets[i].box) > iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(i);
  }
  return kept;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold) {
  std::vector<Detection> out;
  for (std::size_t i : nms_indices(dets, iou_threshold)) out.push_back(dets[i]);
  return out;
}

namespace {

// Evenly spaced values computed the way numpy's linspace does.
std::vector<double> linspace(double start, double stop, std::size_t count) {
  std::vector<double> v(count);
  const double step = (stop - start) / double(count - 1);
  for (std::size_t i = 0; i < count; ++i) v[i] = double(i) * step + start;
  v.back() = stop;
  return v;
}

struct Ranked {
  std::size_t image;
  const Detection* det;
};

bool ranks_before(const Ranked& a, const Ranked& b) {
  if (a.det->score != b.det->score) return a.det->score > b.det->score;
  if (a.image != b.image) return a.image < b.image;
  const auto& p = a.det->box;
  const auto& q = b.det->box;
  return std::tie(p.x0, p.y0, p.x1, p.y1) < std::tie(q.x0, q.y0, q.x1, q.y1);
}

}  // namespace

std::vector<double> coco_iou_thresholds() { return linspace(0.5, 0.95, 10); }

double average_precision(const std::vector<std::vector<Detection>>& detections,
                         const std::vector<std::vector<GroundTruth>>& ground_truth, int category, double threshold) {
  if (detections.size() != ground_truth.size()) {
    throw std::invalid_argument("evaluate_map: " + std::to_string(detections.size()) + " detection lists for " +
                                std::to_string(ground_truth.size()) + " images");
  }
  std::vector<std::vector<const GroundTruth*>> gts(ground_truth.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    for (const auto& g : ground_truth[i]) {
      if (g.category == category) gts[i].push_back(&g);
    }
    positives += gts[i].size();
  }
  if (positives == 0) return -1.0;

  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (const auto& d : detections[i]) {
      if (d.category == category) ranked.push_back({i, &d});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), ranks_before);

  std::vector<std::vector<bool>> taken(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) taken[i].assign(gts[i].size(), false);
  std::vector<double> precision, recall;
  std::size_t tp = 0, fp = 0;
  for (const auto& r : ranked) {
    // Best unmatched ground truth at or above the threshold; equal IoU picks
    // the later one.
    double best = std::min(threshold, 1.0 - 1e-10);
    long match = -1;
    for (std::size_t g = 0; g < gts[r.image].size(); ++g) {
      if (taken[r.image][g]) continue;
      const double v = iou(r.det->box, gts[r.image][g]->box);
      if (v < best) continue;
      best = v;
      match = long(g);
    }
    if (match >= 0) {
      taken[r.image][std::size_t(match)] = true;
      ++tp;
    } else {
      ++fp;
    }
    recall.push_back(double(tp) / double(positives));
    precision.push_back(double(tp) / double(tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  const auto points = linspace(0.0, 1.0, 101);
  for (double p : points) {
    const auto it = std::lower_bound(recall.begin(), recall.end(), p);
    if (it != recall.end()) sum += precision[std::size_t(it - recall.begin())];
  }
  return sum / double(points.size());
}

MapReport evaluate_map(const std::vector<std::vector<Detection>>& detections,
                       const std::vector<std::vector<GroundTruth>>& ground_truth, std::size_t num_classes) {
  MapReport report;
  report.class_ap.assign(num_classes, -1.0);
  report.class_has_gt.assign(num_classes, false);
  const auto thresholds = coco_iou_thresholds();
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    double acc = 0.0;
    bool has_gt = true;
    for (double t : thresholds) {
      const double ap = average_precision(detections, ground_truth, int(c), t);
      if (ap < 0) {
        has_gt = false;
        break;
      }
      acc += ap;
    }
    if (!has_gt) continue;
    report.class_has_gt[c] = true;
    report.class_ap[c] = acc / double(thresholds.size());
    total += report.class_ap[c];
    ++counted;
  }
  report.mean = counted ? total / double(counted) : 0.0;
  return report;
}

void write_map_csv(const std::filesystem::path& path, const MapReport& report,
                   const std::vector<std::string>& class_names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(6);
  out << std::fixed;
  out << "class,AP\n";
  for (std::size_t c = 0; c < report.class_ap.size(); ++c) {
    if (!report.class_has_gt[c]) continue;
    out << (c < class_names.size() ? class_names[c] : std::to_string(c)) << ',' << report.class_ap[c] << '\n';
  }
  out << "mean," << report.mean << '\n';
}

std::vector<std::vector<GroundTruth>> ground_truth_of(const doc::CocoDataset& data) {
  std::vector<std::vector<GroundTruth>> out(data.images.size());
  for (const auto& o : data.objects) out.at(o.image).push_back({o.category, o.box});
  return out;
}

std::string dump_coco_results(const doc::CocoDataset& data, const std::vector<std::vector<Detection>>& detections) {
  if (detections.size() != data.images.size()) throw std::invalid_argument("dump_coco_results: image count mismatch");
  json out = json::array();
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (const auto& d : detections[i]) {
      const auto xywh = doc::xyxy_to_xywh(d.box);
      out.push_back({{"image_id", data.images[i].id},
                     {"category_id", data.category_ids.at(std::size_t(d.category))},
                     {"bbox", {xywh[0], xywh[1], xywh[2], xywh[3]}},
                     {"score", d.score}});
    }
  }
  return out.dump(1);
}

std::vector<std::vector<Detection>> parse_coco_results(const doc::CocoDataset& data, const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw doc::FormatError(std::string("results: ") + e.what());
  }
  if (!root.is_array()) throw doc::FormatError("results: expected an array");
  std::map<long, std::size_t> image_index;
  for (std::size_t i = 0; i < data.images.size(); ++i) image_index[data.images[i].id] = i;
  std::map<long, int> category_index;
  for (std::size_t c = 0; c < data.category_ids.size(); ++c) category_index[data.category_ids[c]] = int(c);
  std::vector<std::vector<Detection>> out(data.images.size());
  for (std::size_t k = 0; k < root.size(); ++k) {
    const auto& r = root[k];
    const std::string where = "results[" + std::to_string(k) + "]";
    try {
      const auto img = image_index.find(r.at("image_id").get<long>());
      if (img == image_index.end()) throw doc::FormatError(where + ".image_id: unknown image");
      const auto cat = category_index.find(r.at("category_id").get<long>());
      if (cat == category_index.end()) throw doc::FormatError(where + ".category_id: unknown category");
      const auto bbox = r.at("bbox").get<std::array<double, 4>>();
      out[img->second].push_back({cat->second, r.at("score").get<double>(), doc::xywh_to_xyxy(bbox)});
    } catch (const json::exception& e) {
      throw doc::FormatError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vgt::detect
