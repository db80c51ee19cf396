#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vgt/doc/coco.h"
#include "vgt/doc/types.h"

namespace vgt::detect {

using doc::BoxF;

struct Detection {
  int category = 0;  // contiguous class index
  double score = 0.0;
  BoxF box;
};

struct GroundTruth {
  int category = 0;
  BoxF box;
};

/// Intersection over union; 0 when the union is empty.
double iou(const BoxF& a, const BoxF& b);

/// Greedy per-class suppression in descending score order. Equal scores keep
/// the lower input index first. Returns kept indices in that visiting order.
std::vector<std::size_t> nms_indices(const std::vector<Detection>& dets, double iou_threshold = 0.5);
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold = 0.5);

/// The ten COCO thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

struct MapReport {
  std::vector<double> class_ap;     // -1 for classes without ground truth
  std::vector<bool> class_has_gt;
  double mean = 0.0;                // mean over classes with ground truth
};

/// mAP@[0.50:0.95] with greedy score-ordered one-to-one matching and 101-point
/// interpolated precision. Detections and ground truth are given per image.
/// Score ties are ordered by image, then by box coordinates, so the result
/// does not depend on input order.
MapReport evaluate_map(const std::vector<std::vector<Detection>>& detections,
                       const std::vector<std::vector<GroundTruth>>& ground_truth, std::size_t num_classes);

/// AP of one class at one IoU threshold.
double average_precision(const std::vector<std::vector<Detection>>& detections,
                         const std::vector<std::vector<GroundTruth>>& ground_truth, int category, double threshold);

/// One "class,AP" row per class with ground truth, then "mean,<mAP>".
void write_map_csv(const std::filesystem::path& path, const MapReport& report,
                   const std::vector<std::string>& class_names);

/// Ground truth of every image of a COCO dataset.
std::vector<std::vector<GroundTruth>> ground_truth_of(const doc::CocoDataset& data);

/// COCO results JSON: [{image_id, category_id, bbox [x, y, w, h], score}].
std::string dump_coco_results(const doc::CocoDataset& data, const std::vector<std::vector<Detection>>& detections);
/// Parses a results file back into per-image detections of `data`.
std::vector<std::vector<Detection>> parse_coco_results(const doc::CocoDataset& data, const std::string& json);

}  // namespace vgt::detect
