#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "vgt/cli/config.h"

namespace vgt::cli {

enum class Precision { f32, f64 };

/// Reads VGT_PRECISION (f32 when unset); other values throw ConfigError.
Precision precision_from_env();

std::vector<std::string> command_names();

/// Runs synth, grid-dump, pretrain, train or eval, writing artifacts under
/// config.out and progress lines to `log`. Throws on any error.
///
///   synth      corpus of config.pages pages (pages/, annotations.json)
///   grid-dump  grid.png and grid.csv of page config.page of config.data
///   pretrain   pretrain.ckpt, pretrain_loss.csv, pretrain_metrics.txt
///   train      detector.ckpt, train_log.csv, init_report.txt with config.init
///   eval       metrics.csv and results.json for config.val_data (or data),
///              from config.predictions or a detector config.checkpoint
void run_command(const std::string& command, const RunConfig& config, Precision precision, std::ostream& log);

}  // namespace vgt::cli
