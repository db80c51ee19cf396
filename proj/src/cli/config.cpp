#include "vgt/cli/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace vgt::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct BadValue {
  std::string expected;
};

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw BadValue{"a non-negative integer"};
  return out;
}

int to_int(const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw BadValue{"an integer"};
  return out;
}

double to_double(const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw BadValue{"a finite number"};
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValue{"a boolean (true/false)"};
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <typename V>
std::string join(const std::vector<V>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<V, double>) {
      out += fmt_double(items[i]);
    } else {
      out += items[i];
    }
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Field size_field(M RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = static_cast<M>(to_uint(v)); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Field int_field(int RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = to_int(v); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Field double_field(double RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = to_double(v); },
          [m](const RunConfig& c) { return fmt_double(c.*m); }};
}

Field bool_field(bool RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = to_bool(v); },
          [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field path_field(std::filesystem::path RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return (c.*m).string(); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"seed", size_field(&RunConfig::seed)},
      {"out", path_field(&RunConfig::out)},
      {"vocab", path_field(&RunConfig::vocab)},
      {"data", path_field(&RunConfig::data)},
      {"val_data", path_field(&RunConfig::val_data)},
      {"init", path_field(&RunConfig::init)},
      {"checkpoint", path_field(&RunConfig::checkpoint)},
      {"predictions", path_field(&RunConfig::predictions)},
      {"pages", size_field(&RunConfig::pages)},
      {"page_size", int_field(&RunConfig::page_size)},
      {"classes",
       {[](RunConfig& c, const std::string& v) {
          c.classes = to_list(v);
          if (c.classes.empty()) throw BadValue{"a comma-separated list of class names"};
        },
        [](const RunConfig& c) { return join(c.classes); }}},
      {"page", size_field(&RunConfig::page)},
      {"image_size", size_field(&RunConfig::image_size)},
      {"patch", size_field(&RunConfig::patch)},
      {"layers", size_field(&RunConfig::layers)},
      {"heads", size_field(&RunConfig::heads)},
      {"hidden", size_field(&RunConfig::hidden)},
      {"mlp", size_field(&RunConfig::mlp)},
      {"grid_channels", size_field(&RunConfig::grid_channels)},
      {"use_vision", bool_field(&RunConfig::use_vision)},
      {"use_grid", bool_field(&RunConfig::use_grid)},
      {"mask_ratio", double_field(&RunConfig::mask_ratio)},
      {"tau", double_field(&RunConfig::tau)},
      {"max_segments", size_field(&RunConfig::max_segments)},
      {"roi_out", size_field(&RunConfig::roi_out)},
      {"target_dim", size_field(&RunConfig::target_dim)},
      {"mglm_weight", double_field(&RunConfig::mglm_weight)},
      {"slm_weight", double_field(&RunConfig::slm_weight)},
      {"pretrain_steps", size_field(&RunConfig::pretrain_steps)},
      {"pretrain_lr", double_field(&RunConfig::pretrain_lr)},
      {"pretrain_warmup", double_field(&RunConfig::pretrain_warmup)},
      {"pretrain_weight_decay", double_field(&RunConfig::pretrain_weight_decay)},
      {"eval_rounds", size_field(&RunConfig::eval_rounds)},
      {"train_steps", size_field(&RunConfig::train_steps)},
      {"train_lr", double_field(&RunConfig::train_lr)},
      {"train_warmup", double_field(&RunConfig::train_warmup)},
      {"train_weight_decay", double_field(&RunConfig::train_weight_decay)},
      {"lr_decay_at",
       {[](RunConfig& c, const std::string& v) {
          std::vector<double> out;
          for (const auto& item : to_list(v)) out.push_back(to_double(item));
          c.lr_decay_at = out;
        },
        [](const RunConfig& c) { return join(c.lr_decay_at); }}},
      {"max_shift", int_field(&RunConfig::max_shift)},
      {"eval_every", size_field(&RunConfig::eval_every)},
      {"tower_convs", size_field(&RunConfig::tower_convs)},
      {"centerness", bool_field(&RunConfig::centerness)},
      {"focal_alpha", double_field(&RunConfig::focal_alpha)},
      {"focal_gamma", double_field(&RunConfig::focal_gamma)},
      {"score_threshold", double_field(&RunConfig::score_threshold)},
      {"nms_threshold", double_field(&RunConfig::nms_threshold)},
      {"max_detections", size_field(&RunConfig::max_detections)},
  };
  return table;
}

std::string where_of(const RunConfig& c, const std::string& key) {
  const auto it = c.origin.find(key);
  return it == c.origin.end() ? "default" : it->second;
}

[[noreturn]] void fail(const RunConfig& c, const std::string& key, const std::string& what) {
  throw ConfigError(where_of(c, key) + ": " + key + ": " + what);
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value, const std::string& where) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError(where + ": unknown key '" + key + "'");
  try {
    it->second.set(config, value);
  } catch (const BadValue& bad) {
    throw ConfigError(where + ": " + key + ": expected " + bad.expected + ", got '" + value + "'");
  }
  config.origin[key] = where;
}

void validate(const RunConfig& c) {
  if (c.image_size == 0) fail(c, "image_size", "must be positive");
  if (c.patch == 0 || c.image_size % c.patch != 0) {
    fail(c, "patch", std::to_string(c.patch) + " does not divide image_size " + std::to_string(c.image_size));
  }
  if (c.heads == 0 || c.hidden % c.heads != 0) {
    fail(c, "heads", std::to_string(c.heads) + " does not divide hidden " + std::to_string(c.hidden));
  }
  if (c.layers == 0) fail(c, "layers", "must be positive");
  if (!c.use_vision && !c.use_grid) fail(c, "use_grid", "at least one stream must be enabled");
  if (!(c.mask_ratio > 0 && c.mask_ratio <= 1)) fail(c, "mask_ratio", "must be in (0, 1]");
  if (!(c.tau > 0)) fail(c, "tau", "must be positive");
  if (c.max_segments < 2) fail(c, "max_segments", "needs at least 2 segments for the contrastive loss");
  if (c.roi_out == 0) fail(c, "roi_out", "must be positive");
  if (c.page_size <= 0) fail(c, "page_size", "must be positive");
  if (c.max_shift < 0) fail(c, "max_shift", "must be non-negative");
  for (double f : c.lr_decay_at) {
    if (!(f > 0 && f <= 1)) fail(c, "lr_decay_at", "fractions must be in (0, 1]");
  }
  if (!(c.focal_alpha >= 0 && c.focal_alpha <= 1)) fail(c, "focal_alpha", "must be in [0, 1]");
  if (!(c.score_threshold >= 0 && c.score_threshold < 1)) fail(c, "score_threshold", "must be in [0, 1)");
  if (!(c.nms_threshold > 0 && c.nms_threshold <= 1)) fail(c, "nms_threshold", "must be in (0, 1]");
  const std::pair<const char*, const std::filesystem::path*> paths[] = {
      {"vocab", &c.vocab}, {"data", &c.data}, {"val_data", &c.val_data}, {"init", &c.init},
      {"checkpoint", &c.checkpoint}, {"predictions", &c.predictions}};
  for (const auto& [key, path] : paths) {
    if (path->empty()) {
      if (std::string(key) == "vocab") fail(c, key, "must be set");
      continue;
    }
    if (!std::filesystem::exists(*path)) fail(c, key, "path '" + path->string() + "' does not exist");
  }
}

RunConfig parse_config_text(std::string_view text, const std::string& source,
                            const std::vector<std::string>& overrides) {
  RunConfig config;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    apply_setting(config, key, trim(line.substr(eq + 1)), where);
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("override: expected key=value, got '" + item + "'");
    apply_setting(config, trim(item.substr(0, eq)), trim(item.substr(eq + 1)), "override");
  }
  validate(config);
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string dump_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(config) + "\n";
  return out;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [key, field] : fields()) out.push_back(key);
  return out;
}

backbone::VgtConfig model_config(const RunConfig& c, std::size_t vocab_size) {
  auto m = backbone::VgtConfig::desk(c.image_size, vocab_size);
  for (auto* enc : {&m.vit, &m.git}) {
    enc->patch = c.patch;
    enc->layers = c.layers;
    enc->heads = c.heads;
    enc->hidden = c.hidden;
    enc->mlp = c.mlp;
  }
  m.grid_channels = c.grid_channels;
  m.git.channels = c.grid_channels;
  m.use_vision = c.use_vision;
  m.use_grid = c.use_grid;
  m.validate();
  return m;
}

doc::SynthConfig synth_config(const RunConfig& c) {
  doc::SynthConfig s;
  s.page_size = c.page_size;
  s.classes = c.classes;
  return s;
}

pretrain::PretrainConfig pretrain_config(const RunConfig& c) {
  pretrain::PretrainConfig p;
  p.mask_ratio = c.mask_ratio;
  p.tau = c.tau;
  p.max_segments = c.max_segments;
  p.roi_out = c.roi_out;
  p.target_dim = c.target_dim;
  p.mglm_weight = c.mglm_weight;
  p.slm_weight = c.slm_weight;
  return p;
}

pretrain::PretrainSchedule pretrain_schedule(const RunConfig& c) {
  pretrain::PretrainSchedule s;
  s.steps = c.pretrain_steps;
  s.lr = c.pretrain_lr;
  s.warmup_fraction = c.pretrain_warmup;
  s.weight_decay = c.pretrain_weight_decay;
  s.seed = c.seed;
  return s;
}

detect::DetectorConfig detector_config(const RunConfig& c, std::size_t vocab_size, std::size_t num_classes) {
  detect::DetectorConfig d;
  d.backbone = model_config(c, vocab_size);
  d.head.num_classes = num_classes;
  d.head.tower_convs = c.tower_convs;
  d.head.centerness = c.centerness;
  d.head.focal_alpha = c.focal_alpha;
  d.head.focal_gamma = c.focal_gamma;
  d.head.score_threshold = c.score_threshold;
  d.head.nms_threshold = c.nms_threshold;
  d.head.max_detections = c.max_detections;
  return d;
}

detect::TrainSchedule train_schedule(const RunConfig& c) {
  detect::TrainSchedule s;
  s.steps = c.train_steps;
  s.lr = c.train_lr;
  s.warmup_fraction = c.train_warmup;
  s.weight_decay = c.train_weight_decay;
  s.decay_at = c.lr_decay_at;
  s.max_shift = c.max_shift;
  s.eval_every = c.eval_every;
  s.seed = c.seed;
  return s;
}

}  // namespace vgt::cli
