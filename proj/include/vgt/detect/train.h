#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vgt/backbone/vgt.h"
#include "vgt/detect/head.h"
#include "vgt/doc/synth.h"

namespace vgt::detect {

struct DetectorConfig {
  backbone::VgtConfig backbone;
  HeadConfig head;
};

/// Pages with their ground truth, aligned by index.
struct DetectionSet {
  std::vector<doc::DocPage> pages;
  std::vector<std::vector<GroundTruth>> ground_truth;
  std::vector<std::string> class_names;
  std::size_t size() const { return pages.size(); }
};

DetectionSet detection_set(const doc::Corpus& corpus);

/// Moves page content by (dx, dy) pixels: the image is filled with paper
/// white, token and word boxes are clipped (tokens falling off are dropped),
/// and ground truth is clipped, dropping boxes that lose more than half their
/// area.
std::pair<doc::DocPage, std::vector<GroundTruth>> translate_example(const doc::DocPage& page,
                                                                   const std::vector<GroundTruth>& gts, int dx,
                                                                   int dy);

/// Backbone from seed, head from a derived seed.
template <typename T>
void init_detector(ParamStore<T>& store, const DetectorConfig& config, std::uint64_t seed);

template <typename T>
HeadOutput<T> detector_forward(const doc::DocPage& page, const DetectorConfig& config, ParamStore<T>& store);

template <typename T>
std::vector<Detection> predict(const doc::DocPage& page, const DetectorConfig& config, ParamStore<T>& store);

template <typename T>
std::vector<std::vector<Detection>> predict_all(const std::vector<doc::DocPage>& pages, const DetectorConfig& config,
                                                ParamStore<T>& store);

struct TrainSchedule {
  std::size_t steps = 1000;
  double lr = 1e-3;
  double warmup_fraction = 0.05;
  double weight_decay = 0.05;
  std::vector<double> decay_at = {0.75, 0.9};  // fractions of steps where lr drops 10x
  int max_shift = 8;           // random page translation in [-max_shift, max_shift] pixels
  std::size_t eval_every = 0;  // 0 evaluates only after the last step
  std::uint64_t seed = 0;
};

struct TrainLogEntry {
  std::size_t step = 0;   // steps completed
  double loss = 0.0;      // mean training loss since the previous entry
  double val_map = 0.0;
};

/// Cycles through the training pages in a per-epoch seeded order, with linear
/// warmup and step decay, and evaluates mAP on `val` at each checkpoint.
template <typename T>
std::vector<TrainLogEntry> train_detector(const DetectionSet& train, const DetectionSet& val,
                                          const DetectorConfig& config, ParamStore<T>& store,
                                          const TrainSchedule& schedule,
                                          const std::function<void(const TrainLogEntry&)>& on_log = {});

}  // namespace vgt::detect
