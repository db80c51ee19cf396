#include "vgt/detect/head.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vgt/core/ops.h"

namespace vgt::detect {

template <typename T>
void init_head(ParamStore<T>& store, std::size_t channels, const HeadConfig& config, std::uint64_t seed) {
  if (config.num_classes == 0) throw std::invalid_argument("init_head: no classes");
  if (!(config.prior > 0 && config.prior < 1)) throw std::invalid_argument("init_head: prior must be in (0,1)");
  Initializer<T> init(seed);
  for (std::size_t i = 1; i <= config.tower_convs; ++i) {
    const std::string name = "head.tower" + std::to_string(i);
    store.add(name + ".w", init.normal({channels, channels, 3, 3}, 0.01));
    store.add(name + ".b", init.zeros({channels}));
  }
  store.add("head.cls.w", init.normal({config.num_classes, channels, 1, 1}, 0.01));
  store.add("head.cls.b", Tensor<T>::full({config.num_classes}, T(-std::log((1 - config.prior) / config.prior)), true));
  store.add("head.reg.w", init.normal({4, channels, 1, 1}, 0.01));
  store.add("head.reg.b", init.zeros({4}));
  if (config.centerness) {
    store.add("head.ctr.w", init.normal({1, channels, 1, 1}, 0.01));
    store.add("head.ctr.b", init.zeros({1}));
  }
}

std::vector<Location> pyramid_locations(const std::vector<std::array<std::size_t, 2>>& level_shapes,
                                        std::size_t image_height) {
  std::vector<Location> out;
  for (std::size_t l = 0; l < level_shapes.size(); ++l) {
    const auto [h, w] = level_shapes[l];
    const double s = double(image_height) / double(h);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) out.push_back({double(j) * s + s / 2, double(i) * s + s / 2, s, l});
    }
  }
  return out;
}

template <typename T>
HeadOutput<T> head_forward(const backbone::FeaturePyramid<T>& pyramid, std::size_t image_height,
                           ParamStore<T>& store, const HeadConfig& config) {
  std::vector<Tensor<T>> logits, dists, ctrs;
  std::vector<std::array<std::size_t, 2>> shapes;
  for (const auto& level : pyramid) {
    Tensor<T> x = level;
    for (std::size_t i = 1; i <= config.tower_convs; ++i) {
      const std::string name = "head.tower" + std::to_string(i);
      x = ops::relu(ops::conv2d(x, store.get(name + ".w"), store.get(name + ".b"), 1, 1));
    }
    const std::size_t h = x.dim(1), w = x.dim(2);
    auto cls = ops::conv2d(x, store.get("head.cls.w"), store.get("head.cls.b"), 1, 0);
    auto reg = ops::conv2d(x, store.get("head.reg.w"), store.get("head.reg.b"), 1, 0);
    logits.push_back(ops::transpose(ops::reshape(cls, {cls.dim(0), h * w})));
    dists.push_back(ops::transpose(ops::reshape(reg, {4, h * w})));
    if (config.centerness) {
      auto ctr = ops::conv2d(x, store.get("head.ctr.w"), store.get("head.ctr.b"), 1, 0);
      ctrs.push_back(ops::reshape(ctr, {h * w, 1}));
    }
    shapes.push_back({h, w});
  }
  HeadOutput<T> out{ops::concat_rows(logits), ops::concat_rows(dists), {}, pyramid_locations(shapes, image_height)};
  if (config.centerness) out.ctr_logits = ops::concat_rows(ctrs);
  return out;
}

std::size_t target_level(const BoxF& box, double finest_stride) {
  const double side = std::sqrt(std::max(box.area(), 0.0));
  const double base = 8.0 * finest_stride;
  if (side < base) return 0;
  if (side < 2 * base) return 1;
  if (side < 4 * base) return 2;
  return 3;
}

HeadTargets assign_targets(const std::vector<GroundTruth>& gts, const std::vector<Location>& locations,
                           double image_width, double image_height) {
  HeadTargets t;
  t.labels.assign(locations.size(), -1);
  t.distances.assign(locations.size(), {0, 0, 0, 0});
  t.assigned_gt.assign(locations.size(), 0);
  if (locations.empty()) return t;
  double finest = locations.front().stride;
  for (const auto& loc : locations) finest = std::min(finest, loc.stride);

  std::vector<BoxF> boxes;
  std::vector<std::size_t> levels;
  for (const auto& g : gts) {
    BoxF b{std::clamp(g.box.x0, 0.0, image_width), std::clamp(g.box.y0, 0.0, image_height),
           std::clamp(g.box.x1, 0.0, image_width), std::clamp(g.box.y1, 0.0, image_height)};
    boxes.push_back(b);
    levels.push_back(b.valid() ? target_level(b, finest) : std::size_t(-1));
  }
  for (std::size_t n = 0; n < locations.size(); ++n) {
    const auto& loc = locations[n];
    long best = -1;
    for (std::size_t g = 0; g < boxes.size(); ++g) {
      const auto& b = boxes[g];
      if (levels[g] != loc.level) continue;
      if (!(loc.x > b.x0 && loc.x < b.x1 && loc.y > b.y0 && loc.y < b.y1)) continue;
      if (best < 0 || b.area() < boxes[std::size_t(best)].area()) best = long(g);
    }
    if (best < 0) continue;
    const auto& b = boxes[std::size_t(best)];
    t.labels[n] = gts[std::size_t(best)].category;
    t.distances[n] = {(loc.x - b.x0) / loc.stride, (loc.y - b.y0) / loc.stride, (b.x1 - loc.x) / loc.stride,
                      (b.y1 - loc.y) / loc.stride};
    t.assigned_gt[n] = std::size_t(best);
    ++t.positives;
  }
  return t;
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

template <typename T>
Tensor<T> focal_loss_sum(const Tensor<T>& logits, const std::vector<int>& labels, double alpha, double gamma) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("focal_loss: logits " + shape_str(logits.shape()) + " vs " + std::to_string(labels.size()) +
                     " labels");
  }
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<T> grad(n * k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= int(k)) throw std::out_of_range("focal_loss: label out of range");
    for (std::size_t c = 0; c < k; ++c) {
      const double z = double(logits.at(i * k + c));
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double log_p = -softplus(-z), log_q = -softplus(z);
      if (labels[i] == int(c)) {
        const double w = std::pow(1.0 - p, gamma);
        total += -alpha * w * log_p;
        grad[i * k + c] = T(alpha * w * (gamma * p * log_p - (1.0 - p)));
      } else {
        const double w = std::pow(p, gamma);
        total += -(1.0 - alpha) * w * log_q;
        grad[i * k + c] = T((1.0 - alpha) * w * (p - gamma * (1.0 - p) * log_q));
      }
    }
  }
  const bool track = active_tape<T>() != nullptr && logits.requires_grad();
  auto result = Tensor<T>::scalar(T(total), track);
  check_finite(result, "focal_loss");
  if (track) {
    active_tape<T>()->record(result, [L = logits.shared_storage(), O = result.shared_storage(), grad = std::move(grad)]() {
      L->ensure_grad();
      const T g = O->grad[0];
      for (std::size_t i = 0; i < grad.size(); ++i) L->grad[i] += g * grad[i];
    });
  }
  return result;
}

template <typename T>
Tensor<T> iou_loss_sum(const Tensor<T>& raw_dist, const std::vector<std::array<double, 4>>& targets) {
  if (raw_dist.rank() != 2 || raw_dist.dim(1) != 4 || raw_dist.dim(0) != targets.size()) {
    throw ShapeError("iou_loss: distances " + shape_str(raw_dist.shape()) + " vs " + std::to_string(targets.size()) +
                     " targets");
  }
  const std::size_t n = targets.size();
  std::vector<T> grad(n * 4);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 4> d;
    for (std::size_t j = 0; j < 4; ++j) d[j] = std::exp(double(raw_dist.at(i * 4 + j)));
    const auto& g = targets[i];
    const double pred_area = (d[0] + d[2]) * (d[1] + d[3]);
    const double gt_area = (g[0] + g[2]) * (g[1] + g[3]);
    const double iw = std::min(d[0], g[0]) + std::min(d[2], g[2]);
    const double ih = std::min(d[1], g[1]) + std::min(d[3], g[3]);
    const double inter = iw * ih;
    const double uni = pred_area + gt_area - inter;
    total += std::log(uni) - std::log(inter);
    // d loss / d distance, then chain through exp.
    for (std::size_t j = 0; j < 4; ++j) {
      const bool horizontal = j == 0 || j == 2;
      const double d_area = horizontal ? d[1] + d[3] : d[0] + d[2];
      const double d_inter = d[j] <= g[j] ? (horizontal ? ih : iw) : 0.0;
      const double dl = (d_area - d_inter) / uni - d_inter / inter;
      grad[i * 4 + j] = T(dl * d[j]);
    }
  }
  const bool track = active_tape<T>() != nullptr && raw_dist.requires_grad();
  auto result = Tensor<T>::scalar(T(total), track);
  check_finite(result, "iou_loss");
  if (track) {
    active_tape<T>()->record(result, [R = raw_dist.shared_storage(), O = result.shared_storage(), grad = std::move(grad)]() {
      R->ensure_grad();
      const T g = O->grad[0];
      for (std::size_t i = 0; i < grad.size(); ++i) R->grad[i] += g * grad[i];
    });
  }
  return result;
}

template <typename T>
Tensor<T> bce_with_logits_sum(const Tensor<T>& logits, const std::vector<double>& targets) {
  if (logits.numel() != targets.size()) {
    throw ShapeError("bce: logits " + shape_str(logits.shape()) + " vs " + std::to_string(targets.size()) + " targets");
  }
  std::vector<T> grad(targets.size());
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double z = double(logits.at(i)), y = targets[i];
    total += y * softplus(-z) + (1.0 - y) * softplus(z);
    grad[i] = T(1.0 / (1.0 + std::exp(-z)) - y);
  }
  const bool track = active_tape<T>() != nullptr && logits.requires_grad();
  auto result = Tensor<T>::scalar(T(total), track);
  check_finite(result, "bce");
  if (track) {
    active_tape<T>()->record(result, [L = logits.shared_storage(), O = result.shared_storage(), grad = std::move(grad)]() {
      L->ensure_grad();
      const T g = O->grad[0];
      for (std::size_t i = 0; i < grad.size(); ++i) L->grad[i] += g * grad[i];
    });
  }
  return result;
}

double centerness(const std::array<double, 4>& d) {
  return std::sqrt(std::min(d[0], d[2]) / std::max(d[0], d[2]) * std::min(d[1], d[3]) / std::max(d[1], d[3]));
}

template <typename T>
DetectionLoss<T> detection_loss(const HeadOutput<T>& out, const HeadTargets& targets, const HeadConfig& config) {
  DetectionLoss<T> loss;
  loss.positives = targets.positives;
  const T norm = T(1.0 / double(std::max<std::size_t>(1, targets.positives)));
  loss.classification = ops::scale(focal_loss_sum(out.logits, targets.labels, config.focal_alpha, config.focal_gamma), norm);
  if (targets.positives == 0) {
    loss.total = loss.classification;
    return loss;
  }
  std::vector<std::size_t> rows;
  std::vector<std::array<double, 4>> dist;
  for (std::size_t n = 0; n < targets.labels.size(); ++n) {
    if (targets.labels[n] < 0) continue;
    rows.push_back(n);
    dist.push_back(targets.distances[n]);
  }
  loss.box = ops::scale(iou_loss_sum(ops::gather_rows(out.raw_dist, rows), dist), norm);
  loss.total = ops::add(loss.classification, loss.box);
  if (out.ctr_logits.defined()) {
    std::vector<double> ctr;
    for (const auto& d : dist) ctr.push_back(centerness(d));
    loss.centerness = ops::scale(bce_with_logits_sum(ops::gather_rows(out.ctr_logits, rows), ctr), norm);
    loss.total = ops::add(loss.total, loss.centerness);
  }
  return loss;
}

BoxF decode_box(const Location& loc, const std::array<double, 4>& d) {
  return {loc.x - d[0] * loc.stride, loc.y - d[1] * loc.stride, loc.x + d[2] * loc.stride, loc.y + d[3] * loc.stride};
}

template <typename T>
std::vector<Detection> decode_predictions(const HeadOutput<T>& out, const HeadConfig& config, double image_width,
                                          double image_height) {
  const std::size_t k = out.logits.dim(1);
  std::vector<Detection> dets;
  for (std::size_t n = 0; n < out.locations.size(); ++n) {
    std::array<double, 4> d;
    for (std::size_t j = 0; j < 4; ++j) d[j] = std::exp(double(out.raw_dist.at(n * 4 + j)));
    BoxF box = decode_box(out.locations[n], d);
    box = {std::clamp(box.x0, 0.0, image_width), std::clamp(box.y0, 0.0, image_height),
           std::clamp(box.x1, 0.0, image_width), std::clamp(box.y1, 0.0, image_height)};
    if (!box.valid()) continue;
    const double quality =
        out.ctr_logits.defined() ? 1.0 / (1.0 + std::exp(-double(out.ctr_logits.at(n)))) : 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double p = 1.0 / (1.0 + std::exp(-double(out.logits.at(n * k + c))));
      if (p > config.score_threshold) dets.push_back({int(c), out.ctr_logits.defined() ? std::sqrt(p * quality) : p, box});
    }
  }
  auto kept = nms(dets, config.nms_threshold);
  if (kept.size() > config.max_detections) kept.resize(config.max_detections);
  return kept;
}

#define VGT_INSTANTIATE(T)                                                                                        \
  template void init_head(ParamStore<T>&, std::size_t, const HeadConfig&, std::uint64_t);                         \
  template HeadOutput<T> head_forward(const backbone::FeaturePyramid<T>&, std::size_t, ParamStore<T>&,            \
                                      const HeadConfig&);                                                         \
  template Tensor<T> focal_loss_sum(const Tensor<T>&, const std::vector<int>&, double, double);                   \
  template Tensor<T> iou_loss_sum(const Tensor<T>&, const std::vector<std::array<double, 4>>&);                   \
  template Tensor<T> bce_with_logits_sum(const Tensor<T>&, const std::vector<double>&);                           \
  template DetectionLoss<T> detection_loss(const HeadOutput<T>&, const HeadTargets&, const HeadConfig&);          \
  template std::vector<Detection> decode_predictions(const HeadOutput<T>&, const HeadConfig&, double, double);

VGT_INSTANTIATE(float)
VGT_INSTANTIATE(double)

}  // namespace vgt::detect
