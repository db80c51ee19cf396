// vgt: corpus synthesis, grid inspection, pretraining, detector training and
// evaluation from one config file.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vgt/cli/commands.h"

namespace {

struct Options {
  std::string config;
  std::string seed;
  std::string out;
  std::vector<std::string> sets;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stream document layout analysis at desk scale"};
  app.require_subcommand(1);
  Options opt;
  std::map<std::string, std::string> flag_values;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--set", opt.sets, "extra override key=value (repeatable)");
  };
  auto add_override = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option("--" + flag, flag_values[key], help);
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  add_common(synth);
  add_override(synth, "pages", "pages", "number of pages");
  add_override(synth, "page-size", "page_size", "page side in pixels");

  auto* grid_dump = app.add_subcommand("grid-dump", "render a page's token-id grid as PNG and CSV");
  add_common(grid_dump);
  add_override(grid_dump, "data", "data", "corpus directory");
  add_override(grid_dump, "page", "page", "page index");

  auto* pretrain = app.add_subcommand("pretrain", "pretrain the grid stream");
  add_common(pretrain);
  add_override(pretrain, "data", "data", "corpus directory");
  add_override(pretrain, "steps", "pretrain_steps", "optimizer steps");

  auto* train = app.add_subcommand("train", "train the detector");
  add_common(train);
  add_override(train, "data", "data", "training corpus directory");
  add_override(train, "val", "val_data", "validation corpus directory");
  add_override(train, "init", "init", "pretraining checkpoint providing grid-stream weights");
  add_override(train, "steps", "train_steps", "optimizer steps");

  auto* eval = app.add_subcommand("eval", "score predictions or a detector checkpoint");
  add_common(eval);
  add_override(eval, "data", "val_data", "corpus directory with annotations.json");
  add_override(eval, "checkpoint", "checkpoint", "detector checkpoint");
  add_override(eval, "predictions", "predictions", "COCO results JSON");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::vector<std::string> overrides;
    if (!opt.seed.empty()) overrides.push_back("seed=" + opt.seed);
    if (!opt.out.empty()) overrides.push_back("out=" + opt.out);
    for (const auto& [key, value] : flag_values) {
      if (!value.empty()) overrides.push_back(key + "=" + value);
    }
    overrides.insert(overrides.end(), opt.sets.begin(), opt.sets.end());
    std::string text;
    std::string source = "<defaults>";
    if (!opt.config.empty()) {
      std::ifstream in(opt.config, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
      source = opt.config;
    }
    const auto config = vgt::cli::parse_config_text(text, source, overrides);
    vgt::cli::run_command(command, config, vgt::cli::precision_from_env(), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "vgt " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
