#include "vgt/cli/commands.h"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "vgt/core/checkpoint.h"
#include "vgt/detect/evaluate.h"
#include "vgt/detect/train.h"
#include "vgt/doc/png_io.h"
#include "vgt/doc/synth.h"
#include "vgt/grid/grid.h"
#include "vgt/pretrain/pretrain.h"

namespace vgt::cli {

Precision precision_from_env() {
  const char* v = std::getenv("VGT_PRECISION");
  if (v == nullptr || std::string(v).empty() || std::string(v) == "f32") return Precision::f32;
  if (std::string(v) == "f64") return Precision::f64;
  throw ConfigError(std::string("VGT_PRECISION: expected f32 or f64, got '") + v + "'");
}

std::vector<std::string> command_names() { return {"synth", "grid-dump", "pretrain", "train", "eval"}; }

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

const fs::path& require(const fs::path& path, const char* key, const std::string& command) {
  if (path.empty()) throw ConfigError(command + ": '" + key + "' must be set");
  return path;
}

void run_synth(const RunConfig& c, std::ostream& log) {
  const auto vocab = doc::Vocab::load(c.vocab);
  const auto sc = synth_config(c);
  std::vector<doc::SynthPage> pages;
  for (std::size_t i = 0; i < c.pages; ++i) pages.push_back(doc::synth_generate(sc, vocab, doc::page_seed(c.seed, i)));
  doc::write_corpus(c.out, sc, pages);
  log << "synth: wrote " << pages.size() << " pages to " << c.out.string() << "\n";
}

void run_grid_dump(const RunConfig& c, std::ostream& log) {
  const auto vocab = doc::Vocab::load(c.vocab);
  const auto corpus = doc::load_corpus(require(c.data, "data", "grid-dump"), vocab, int(c.image_size));
  if (c.page >= corpus.pages.size()) {
    throw ConfigError("grid-dump: page " + std::to_string(c.page) + " out of range (corpus has " +
                      std::to_string(corpus.pages.size()) + ")");
  }
  const auto grid = grid::build_token_id_grid(corpus.pages[c.page], c.image_size, c.image_size);
  fs::create_directories(c.out);
  doc::write_png(c.out / "grid.png", grid::grid_to_image(grid));
  grid::write_grid_csv(c.out / "grid.csv", grid);
  log << "grid-dump: page " << c.page << " -> " << (c.out / "grid.png").string() << ", "
      << (c.out / "grid.csv").string() << "\n";
}

template <typename T>
void run_pretrain(const RunConfig& c, std::ostream& log) {
  const auto vocab = doc::Vocab::load(c.vocab);
  const auto corpus = doc::load_corpus(require(c.data, "data", "pretrain"), vocab, int(c.image_size));
  auto model = model_config(c, vocab.size());
  model.use_vision = false;  // pretraining runs the grid stream only
  model.use_grid = true;
  const auto pc = pretrain_config(c);
  ParamStore<T> store;
  backbone::init_vgt_backbone(store, model, c.seed);
  pretrain::init_pretrain_heads(store, model.pyramid_channels(), model.vocab_size, pc, pretrain::mix_seed(c.seed, 100));
  const auto schedule = pretrain_schedule(c);
  const std::size_t every = std::max<std::size_t>(1, schedule.steps / 10);
  const auto records = pretrain::pretrain_run(corpus.pages, model, store, pc, schedule, [&](const pretrain::StepRecord& r) {
    if ((r.step + 1) % every == 0) {
      log << "pretrain: step " << r.step + 1 << "/" << schedule.steps << " L_MGLM " << r.mglm << " L_SLM " << r.slm
          << "\n";
    }
  });
  fs::create_directories(c.out);
  save_checkpoint(c.out / "pretrain.ckpt", store);
  pretrain::write_loss_csv(c.out / "pretrain_loss.csv", records);
  const auto m = pretrain::evaluate_pretrain(corpus.pages, model, store, pc, c.eval_rounds, pretrain::mix_seed(c.seed, 7));
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << "masked_accuracy," << m.mglm_accuracy() << "\nslm_top1,"
     << m.slm_top1() << "\n";
  write_text(c.out / "pretrain_metrics.txt", os.str());
  write_text(c.out / "config.txt", dump_config(c));
  log << "pretrain: masked accuracy " << m.mglm_accuracy() << ", SLM top-1 " << m.slm_top1() << "\n";
}

std::string report_lines(const LoadReport& r) {
  std::string out = "loaded " + std::to_string(r.loaded.size()) + "\nmissing " + std::to_string(r.missing.size()) +
                    "\nunused " + std::to_string(r.unused.size()) + "\n";
  for (const auto& n : r.missing) out += "missing " + n + "\n";
  for (const auto& n : r.unused) out += "unused " + n + "\n";
  return out;
}

template <typename T>
void run_train(const RunConfig& c, std::ostream& log) {
  const auto vocab = doc::Vocab::load(c.vocab);
  const auto train = detect::detection_set(doc::load_corpus(require(c.data, "data", "train"), vocab, int(c.image_size)));
  detect::DetectionSet val;
  if (!c.val_data.empty()) val = detect::detection_set(doc::load_corpus(c.val_data, vocab, int(c.image_size)));
  const auto cfg = detector_config(c, vocab.size(), train.class_names.size());
  ParamStore<T> store;
  detect::init_detector(store, cfg, c.seed);
  fs::create_directories(c.out);
  if (!c.init.empty()) {
    const auto report = load_into(read_checkpoint(c.init), store, {"git."});
    write_text(c.out / "init_report.txt", report_lines(report));
    log << "train: init from " << c.init.string() << ": loaded " << report.loaded.size() << ", missing "
        << report.missing.size() << ", unused " << report.unused.size() << "\n";
    for (const auto& n : report.missing) log << "train: missing " << n << "\n";
    if (report.loaded.empty()) throw std::runtime_error("train: no 'git.' tensors loaded from " + c.init.string());
  }
  std::ostringstream csv;
  csv << "step,loss,val_mAP\n" << std::setprecision(9);
  detect::train_detector(train, val, cfg, store, train_schedule(c), [&](const detect::TrainLogEntry& e) {
    csv << e.step << "," << e.loss << "," << e.val_map << "\n";
    log << "train: step " << e.step << " loss " << e.loss << " val mAP " << e.val_map << "\n";
  });
  save_checkpoint(c.out / "detector.ckpt", store);
  write_text(c.out / "train_log.csv", csv.str());
  write_text(c.out / "config.txt", dump_config(c));
}

template <typename T>
void run_eval(const RunConfig& c, std::ostream& log) {
  const fs::path& dir = c.val_data.empty() ? require(c.data, "val_data", "eval") : c.val_data;
  // Evaluation runs in page pixels, the coordinates of annotations.json.
  const auto data = doc::load_coco(dir / "annotations.json");
  const auto gts = detect::ground_truth_of(data);
  std::vector<std::vector<detect::Detection>> dets;
  if (!c.predictions.empty()) {
    std::ifstream in(c.predictions, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    dets = detect::parse_coco_results(data, ss.str());
  } else {
    const auto& ckpt = require(c.checkpoint, "checkpoint", "eval (or set 'predictions')");
    const auto vocab = doc::Vocab::load(c.vocab);
    const auto corpus = doc::load_corpus(dir, vocab, int(c.image_size));
    const auto cfg = detector_config(c, vocab.size(), data.num_classes());
    ParamStore<T> store;
    detect::init_detector(store, cfg, c.seed);
    const auto report = load_into(read_checkpoint(ckpt), store, {""});
    if (!report.missing.empty()) {
      throw std::runtime_error("eval: checkpoint lacks " + std::to_string(report.missing.size()) +
                               " model tensors, first " + report.missing.front());
    }
    dets = detect::predict_all(corpus.pages, cfg, store);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const double sx = double(data.images[i].width) / double(c.image_size);
      const double sy = double(data.images[i].height) / double(c.image_size);
      for (auto& d : dets[i]) d.box = {d.box.x0 * sx, d.box.y0 * sy, d.box.x1 * sx, d.box.y1 * sy};
    }
  }
  const auto report = detect::evaluate_map(dets, gts, data.num_classes());
  fs::create_directories(c.out);
  detect::write_map_csv(c.out / "metrics.csv", report, data.category_names);
  write_text(c.out / "results.json", detect::dump_coco_results(data, dets));
  log << std::fixed << std::setprecision(4);
  for (std::size_t k = 0; k < report.class_ap.size(); ++k) {
    if (report.class_has_gt[k]) log << "eval: " << data.category_names[k] << " AP " << report.class_ap[k] << "\n";
  }
  log << "eval: mAP " << report.mean << " over " << gts.size() << " images\n";
}

template <typename T>
void dispatch(const std::string& command, const RunConfig& c, std::ostream& log) {
  if (command == "pretrain") return run_pretrain<T>(c, log);
  if (command == "train") return run_train<T>(c, log);
  if (command == "eval") return run_eval<T>(c, log);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

void run_command(const std::string& command, const RunConfig& config, Precision precision, std::ostream& log) {
  if (command == "synth") return run_synth(config, log);
  if (command == "grid-dump") return run_grid_dump(config, log);
  if (precision == Precision::f64) return dispatch<double>(command, config, log);
  dispatch<float>(command, config, log);
}

}  // namespace vgt::cli
