#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vgt/backbone/vgt.h"
#include "vgt/detect/train.h"
#include "vgt/doc/synth.h"
#include "vgt/pretrain/pretrain.h"

namespace vgt::cli {

/// Raised for malformed or invalid settings; the message names the key and
/// where it was set ("file:line" or "override").
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every setting of a run. Defaults are the desk-scale reference values.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  std::filesystem::path vocab = std::filesystem::path(VGT_DATA_DIR) / "vocab_64.txt";

  // Data. Empty paths are unset; set paths must exist.
  std::filesystem::path data;         // corpus for synth output, pretrain, grid-dump
  std::filesystem::path val_data;     // corpus for train validation and eval
  std::filesystem::path init;         // pretraining checkpoint whose "git." weights seed train
  std::filesystem::path checkpoint;   // detector checkpoint for eval
  std::filesystem::path predictions;  // COCO results JSON for eval

  // Synthesis.
  std::size_t pages = 20;
  int page_size = 64;
  std::vector<std::string> classes = {"ParaText", "RegionKV", "Table", "Figure"};
  std::size_t page = 0;  // page index for grid-dump

  // Model.
  std::size_t image_size = 64;
  std::size_t patch = 16;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 32;
  std::size_t mlp = 64;
  std::size_t grid_channels = 64;
  bool use_vision = true;
  bool use_grid = true;

  // Pretraining.
  double mask_ratio = 0.15;
  double tau = 0.01;
  std::size_t max_segments = 64;
  std::size_t roi_out = 3;
  std::size_t target_dim = 64;
  double mglm_weight = 1.0;
  double slm_weight = 1.0;
  std::size_t pretrain_steps = 2000;
  double pretrain_lr = 1e-3;
  double pretrain_warmup = 0.02;
  double pretrain_weight_decay = 0.0;
  std::size_t eval_rounds = 5;

  // Detection.
  std::size_t train_steps = 1000;
  double train_lr = 1e-3;
  double train_warmup = 0.05;
  double train_weight_decay = 0.05;
  std::vector<double> lr_decay_at = {0.75, 0.9};
  int max_shift = 8;
  std::size_t eval_every = 0;
  std::size_t tower_convs = 2;
  bool centerness = true;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double score_threshold = 0.05;
  double nms_threshold = 0.5;
  std::size_t max_detections = 100;

  // Where each key was last set, for error messages.
  std::map<std::string, std::string> origin;
};

/// Reads "key = value" lines ('#' starts a comment), fills defaults and
/// validates. Unknown keys, duplicate keys, type mismatches, missing paths
/// and invalid model shapes throw ConfigError naming the key and line.
RunConfig parse_config(const std::filesystem::path& path);

/// Same as parse_config on in-memory text; `source` labels error locations.
/// Each override is "key=value" and is applied after the text.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>",
                            const std::vector<std::string>& overrides = {});

/// Applies one setting; `where` labels error messages.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value, const std::string& where);

/// Paths exist, sizes divide, probabilities are in range.
void validate(const RunConfig& config);

/// Every key with its current value, one "key = value" line each.
std::string dump_config(const RunConfig& config);

std::vector<std::string> known_keys();

backbone::VgtConfig model_config(const RunConfig& config, std::size_t vocab_size);
doc::SynthConfig synth_config(const RunConfig& config);
pretrain::PretrainConfig pretrain_config(const RunConfig& config);
pretrain::PretrainSchedule pretrain_schedule(const RunConfig& config);
detect::DetectorConfig detector_config(const RunConfig& config, std::size_t vocab_size, std::size_t num_classes);
detect::TrainSchedule train_schedule(const RunConfig& config);

}  // namespace vgt::cli
