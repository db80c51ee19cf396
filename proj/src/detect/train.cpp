#include "vgt/detect/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "vgt/core/autodiff.h"
#include "vgt/core/optim.h"
#include "vgt/grid/grid.h"
#include "vgt/pretrain/pretrain.h"

namespace vgt::detect {

DetectionSet detection_set(const doc::Corpus& corpus) {
  DetectionSet set;
  set.pages = corpus.pages;
  set.ground_truth = ground_truth_of(corpus.annotations);
  set.class_names = corpus.annotations.category_names;
  return set;
}

namespace {

doc::PixelBox shift_box(const doc::PixelBox& b, int dx, int dy, int w, int h) {
  return {std::clamp(b.x0 + dx, 0, w), std::clamp(b.y0 + dy, 0, h), std::clamp(b.x1 + dx, 0, w),
          std::clamp(b.y1 + dy, 0, h)};
}

}  // namespace

std::pair<doc::DocPage, std::vector<GroundTruth>> translate_example(const doc::DocPage& page,
                                                                   const std::vector<GroundTruth>& gts, int dx,
                                                                   int dy) {
  doc::DocPage out = page;
  const int w = page.width, h = page.height;
  auto& img = out.image;
  if (!img.pixels.empty()) {
    std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t(255));
    const int iw = int(img.width), ih = int(img.height), c = int(img.channels);
    const int px = w > 0 ? dx * iw / w : dx, py = h > 0 ? dy * ih / h : dy;
    for (int y = 0; y < ih; ++y) {
      const int sy = y - py;
      if (sy < 0 || sy >= ih) continue;
      for (int x = 0; x < iw; ++x) {
        const int sx = x - px;
        if (sx < 0 || sx >= iw) continue;
        for (int k = 0; k < c; ++k) {
          img.pixels[std::size_t((y * iw + x) * c + k)] = page.image.pixels[std::size_t((sy * iw + sx) * c + k)];
        }
      }
    }
  }
  for (auto& word : out.words) word.box = shift_box(word.box, dx, dy, w, h);
  for (auto& seg : out.segments) seg.box = shift_box(seg.box, dx, dy, w, h);
  out.tokens.clear();
  for (const auto& t : page.tokens) {
    auto moved = t;
    moved.box = shift_box(t.box, dx, dy, w, h);
    if (moved.box.valid()) out.tokens.push_back(moved);
  }
  std::vector<GroundTruth> moved_gts;
  for (const auto& g : gts) {
    BoxF b{std::clamp(g.box.x0 + dx, 0.0, double(w)), std::clamp(g.box.y0 + dy, 0.0, double(h)),
           std::clamp(g.box.x1 + dx, 0.0, double(w)), std::clamp(g.box.y1 + dy, 0.0, double(h))};
    if (b.valid() && b.area() * 2 >= g.box.area()) moved_gts.push_back({g.category, b});
  }
  return {std::move(out), std::move(moved_gts)};
}

template <typename T>
void init_detector(ParamStore<T>& store, const DetectorConfig& config, std::uint64_t seed) {
  backbone::init_vgt_backbone(store, config.backbone, seed);
  init_head(store, config.backbone.pyramid_channels(), config.head, pretrain::mix_seed(seed, 0x4845));
}

template <typename T>
HeadOutput<T> detector_forward(const doc::DocPage& page, const DetectorConfig& config, ParamStore<T>& store) {
  const auto& bb = config.backbone;
  Tensor<T> image;
  if (bb.use_vision) image = backbone::image_tensor<T>(page.image);
  grid::TokenIdGrid ids;
  if (bb.use_grid) ids = grid::build_token_id_grid(page, bb.git.height, bb.git.width);
  return head_forward(backbone::vgt_forward(image, ids, bb, store), bb.vit.height, store, config.head);
}

template <typename T>
std::vector<Detection> predict(const doc::DocPage& page, const DetectorConfig& config, ParamStore<T>& store) {
  const auto out = detector_forward(page, config, store);
  return decode_predictions(out, config.head, double(config.backbone.vit.width), double(config.backbone.vit.height));
}

template <typename T>
std::vector<std::vector<Detection>> predict_all(const std::vector<doc::DocPage>& pages, const DetectorConfig& config,
                                                ParamStore<T>& store) {
  std::vector<std::vector<Detection>> out;
  out.reserve(pages.size());
  for (const auto& p : pages) out.push_back(predict(p, config, store));
  return out;
}

template <typename T>
std::vector<TrainLogEntry> train_detector(const DetectionSet& train, const DetectionSet& val,
                                          const DetectorConfig& config, ParamStore<T>& store,
                                          const TrainSchedule& schedule,
                                          const std::function<void(const TrainLogEntry&)>& on_log) {
  if (train.size() == 0) throw std::invalid_argument("train_detector: empty training set");
  const auto& bb = config.backbone;
  const double w = double(bb.vit.width), h = double(bb.vit.height);
  const auto warmup = std::uint64_t(std::ceil(schedule.warmup_fraction * double(schedule.steps)));
  std::vector<std::size_t> order(train.size());
  std::vector<TrainLogEntry> log;
  double window = 0.0;
  std::size_t window_steps = 0;
  auto checkpoint = [&](std::size_t done) {
    TrainLogEntry e;
    e.step = done;
    e.loss = window_steps ? window / double(window_steps) : 0.0;
    if (val.size() > 0) e.val_map = evaluate_map(predict_all(val.pages, config, store), val.ground_truth,
                                                 config.head.num_classes).mean;
    log.push_back(e);
    if (on_log) on_log(e);
    window = 0.0;
    window_steps = 0;
  };
  for (std::size_t step = 0; step < schedule.steps; ++step) {
    const std::size_t pos = step % train.size();
    if (pos == 0) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::mt19937_64 rng(pretrain::mix_seed(schedule.seed, step / train.size()));
      std::shuffle(order.begin(), order.end(), rng);
    }
    const std::size_t idx = order[pos];
    const doc::DocPage* page = &train.pages[idx];
    const std::vector<GroundTruth>* gts = &train.ground_truth[idx];
    std::pair<doc::DocPage, std::vector<GroundTruth>> shifted;
    if (schedule.max_shift > 0) {
      std::mt19937_64 rng(pretrain::mix_seed(schedule.seed ^ 0x5348494654ULL, step));
      std::uniform_int_distribution<int> u(-schedule.max_shift, schedule.max_shift);
      const int dx = u(rng), dy = u(rng);
      shifted = translate_example(*page, *gts, dx, dy);
      page = &shifted.first;
      gts = &shifted.second;
    }
    Tape<T> tape;
    DetectionLoss<T> loss;
    {
      TapeScope<T> scope(tape);
      const auto out = detector_forward(*page, config, store);
      loss = detection_loss(out, assign_targets(*gts, out.locations, w, h), config.head);
    }
    window += double(loss.total.item());
    ++window_steps;
    backward(tape, loss.total, store);
    AdamWHyper hyper;
    hyper.lr = warmup_lr(schedule.lr, step, warmup);
    for (double f : schedule.decay_at) {
      if (double(step) >= f * double(schedule.steps)) hyper.lr *= 0.1;
    }
    hyper.weight_decay = schedule.weight_decay;
    optimizer_step(store, hyper);
    const std::size_t done = step + 1;
    if (schedule.eval_every > 0 && done % schedule.eval_every == 0 && done != schedule.steps) checkpoint(done);
  }
  checkpoint(schedule.steps);
  return log;
}

#define VGT_INSTANTIATE(T)                                                                                       \
  template void init_detector(ParamStore<T>&, const DetectorConfig&, std::uint64_t);                             \
  template HeadOutput<T> detector_forward(const doc::DocPage&, const DetectorConfig&, ParamStore<T>&);           \
  template std::vector<Detection> predict(const doc::DocPage&, const DetectorConfig&, ParamStore<T>&);           \
  template std::vector<std::vector<Detection>> predict_all(const std::vector<doc::DocPage>&,                     \
                                                           const DetectorConfig&, ParamStore<T>&);               \
  template std::vector<TrainLogEntry> train_detector(const DetectionSet&, const DetectionSet&,                   \
                                                     const DetectorConfig&, ParamStore<T>&, const TrainSchedule&, \
                                                     const std::function<void(const TrainLogEntry&)>&);

VGT_INSTANTIATE(float)
VGT_INSTANTIATE(double)

}  // namespace vgt::detect
