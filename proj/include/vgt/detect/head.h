#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vgt/backbone/backbone.h"
#include "vgt/core/param_store.h"
#include "vgt/detect/evaluate.h"

namespace vgt::detect {

struct HeadConfig {
  std::size_t num_classes = 4;
  std::size_t tower_convs = 2;
  bool centerness = true;  // extra branch that down-weights off-center boxes
  double prior = 0.01;  // initial foreground probability of the class branch
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double score_threshold = 0.05;
  double nms_threshold = 0.5;
  std::size_t max_detections = 100;
};

/// Registers "head.tower<i>" (3x3), "head.cls", "head.reg" and, when
/// enabled, "head.ctr" (1x1).
template <typename T>
void init_head(ParamStore<T>& store, std::size_t channels, const HeadConfig& config, std::uint64_t seed);

/// One pyramid location: its image coordinate, stride and level (0 = finest).
struct Location {
  double x = 0, y = 0, stride = 0;
  std::size_t level = 0;
};

/// Row-major locations of every level, finest first. A cell (i, j) of a level
/// with stride s sits at (j s + s/2, i s + s/2).
std::vector<Location> pyramid_locations(const std::vector<std::array<std::size_t, 2>>& level_shapes,
                                        std::size_t image_height);

/// Head outputs with one row per location, all levels concatenated.
template <typename T>
struct HeadOutput {
  Tensor<T> logits;    // [N, K]
  Tensor<T> raw_dist;  // [N, 4]; distances are exp(raw) in stride units (l, t, r, b)
  Tensor<T> ctr_logits;  // [N, 1]; undefined without the centerness branch
  std::vector<Location> locations;
};

/// Shared tower of conv + ReLU, then 1x1 class, regression and centerness
/// branches, applied to every level.
template <typename T>
HeadOutput<T> head_forward(const backbone::FeaturePyramid<T>& pyramid, std::size_t image_height,
                           ParamStore<T>& store, const HeadConfig& config);

struct HeadTargets {
  std::vector<int> labels;                    // -1 for background
  std::vector<std::array<double, 4>> distances;  // (l, t, r, b) / stride at positives
  std::vector<std::size_t> assigned_gt;       // index into the GT list at positives
  std::size_t positives = 0;
};

/// Level of a ground-truth box: sqrt(area) thresholds of 8, 16, 32 times the
/// finest stride split the boxes into levels 0..3.
std::size_t target_level(const BoxF& box, double finest_stride);

/// Boxes are clamped to the image. A location is positive for a box of its
/// level when it lies strictly inside; overlapping candidates go to the
/// smaller box (then the lower index).
HeadTargets assign_targets(const std::vector<GroundTruth>& gts, const std::vector<Location>& locations,
                           double image_width, double image_height);

/// Focal term summed over all locations and classes.
template <typename T>
Tensor<T> focal_loss_sum(const Tensor<T>& logits, const std::vector<int>& labels, double alpha, double gamma);

/// -log IoU summed over positives; raw distances [P, 4] are exponentiated,
/// targets are positive distances in the same units.
template <typename T>
Tensor<T> iou_loss_sum(const Tensor<T>& raw_dist, const std::vector<std::array<double, 4>>& targets);

template <typename T>
struct DetectionLoss {
  Tensor<T> total;
  Tensor<T> classification;
  Tensor<T> box;         // undefined without positives
  Tensor<T> centerness;  // undefined without positives or the branch
  std::size_t positives = 0;
};

/// Binary cross-entropy with logits [P, 1], summed.
template <typename T>
Tensor<T> bce_with_logits_sum(const Tensor<T>& logits, const std::vector<double>& targets);

/// sqrt(min(l, r) / max(l, r) * min(t, b) / max(t, b)).
double centerness(const std::array<double, 4>& distances);

/// (focal + IoU + centerness BCE) / max(1, positives).
template <typename T>
DetectionLoss<T> detection_loss(const HeadOutput<T>& out, const HeadTargets& targets, const HeadConfig& config);

/// Boxes of every (location, class) whose class probability exceeds the
/// threshold, clamped to the image, then per-class NMS and a top-score cap.
/// With centerness the score is sqrt(class probability * centerness).
template <typename T>
std::vector<Detection> decode_predictions(const HeadOutput<T>& out, const HeadConfig& config, double image_width,
                                          double image_height);

/// Box of distances (stride units) around a location.
BoxF decode_box(const Location& loc, const std::array<double, 4>& distances);

}  // namespace vgt::detect
