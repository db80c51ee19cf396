#include "vgt/pretrain/pretrain.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "vgt/core/autodiff.h"
#include "vgt/core/ops.h"
#include "vgt/roi/roi_align.h"

namespace vgt::pretrain {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

PseudoTargets::PseudoTargets(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("PseudoTargets: dim must be positive");
  rows_.resize(vocab_size);
  for (std::size_t id = 0; id < vocab_size; ++id) {
    std::mt19937_64 rng(mix_seed(seed, id));
    std::normal_distribution<double> normal(0.0, 1.0);
    rows_[id].resize(dim);
    for (double& v : rows_[id]) v = normal(rng);
  }
}

std::vector<double> PseudoTargets::target(const std::vector<int>& token_ids) const {
  if (token_ids.empty()) throw std::invalid_argument("PseudoTargets: empty token list");
  std::vector<double> acc(dim_, 0.0);
  for (int id : token_ids) {
    const auto& r = row(id);
    for (std::size_t i = 0; i < dim_; ++i) acc[i] += r[i];
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(std::max(norm, 1e-24));
  for (double& v : acc) v /= norm;
  return acc;
}

std::vector<int> segment_token_ids(const doc::DocPage& page, const doc::Segment& segment) {
  std::vector<int> ids;
  for (std::size_t w : segment.words) {
    for (const auto& t : page.tokens) {
      if (t.parent_word == w) ids.push_back(t.token_id);
    }
  }
  return ids;
}

template <typename T>
void init_pretrain_heads(ParamStore<T>& store, std::size_t feature_dim, std::size_t vocab_size,
                         const PretrainConfig& config, std::uint64_t seed) {
  Initializer<T> init(seed);
  const std::size_t hidden = config.head_hidden ? config.head_hidden : feature_dim;
  store.add("pretrain.mglm.fc1.w", init.normal({feature_dim, hidden}, 1.0 / std::sqrt(double(feature_dim))));
  store.add("pretrain.mglm.fc1.b", init.zeros({hidden}));
  store.add("pretrain.mglm.fc2.w", init.normal({hidden, vocab_size}, 1.0 / std::sqrt(double(hidden))));
  store.add("pretrain.mglm.fc2.b", init.zeros({vocab_size}));
  store.add("pretrain.slm.proj.w", init.normal({feature_dim, config.target_dim}, 1.0 / std::sqrt(double(feature_dim))));
  store.add("pretrain.slm.proj.b", init.zeros({config.target_dim}));
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size() || targets.empty()) {
    throw ShapeError("cross_entropy: logits " + shape_str(logits.shape()) + " vs " + std::to_string(targets.size()) +
                     " targets");
  }
  std::vector<std::size_t> index;
  for (int t : targets) {
    if (t < 0 || std::size_t(t) >= logits.dim(1)) throw std::out_of_range("cross_entropy: target out of range");
    index.push_back(std::size_t(t));
  }
  return ops::scale(ops::mean(ops::pick(ops::log_softmax(logits, 1), index)), T(-1));
}

namespace {

std::vector<roi::RoIBox> to_roi(const std::vector<doc::PixelBox>& boxes) {
  std::vector<roi::RoIBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back(doc::to_boxf(b));
  return out;
}

template <typename T>
Tensor<T> finest_level(const grid::TokenIdGrid& ids, const backbone::VgtConfig& model, ParamStore<T>& store,
                       double& stride) {
  auto pyramid = backbone::fpn(backbone::grid_pyramid(ids, model, store), store);
  stride = double(model.git.height) / double(pyramid[0].dim(1));
  return pyramid[0];
}

template <typename T>
Tensor<T> constant_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.front().size();
  std::vector<T> v;
  v.reserve(rows.size() * d);
  for (const auto& r : rows) {
    for (double x : r) v.push_back(T(x));
  }
  return Tensor<T>::from({rows.size(), d}, std::move(v));
}

}  // namespace

template <typename T>
Tensor<T> mglm_logits(const Tensor<T>& finest, double stride, const std::vector<doc::PixelBox>& boxes,
                      ParamStore<T>& store, const PretrainConfig& config) {
  auto pooled = roi::roi_align_pooled(finest, to_roi(boxes), stride, config.roi_out);
  auto hidden = ops::gelu(ops::linear(pooled, store.get("pretrain.mglm.fc1.w"), store.get("pretrain.mglm.fc1.b")));
  return ops::linear(hidden, store.get("pretrain.mglm.fc2.w"), store.get("pretrain.mglm.fc2.b"));
}

template <typename T>
Tensor<T> slm_embeddings(const Tensor<T>& finest, double stride, const std::vector<doc::PixelBox>& boxes,
                         ParamStore<T>& store, const PretrainConfig& config) {
  auto pooled = roi::roi_align_pooled(finest, to_roi(boxes), stride, config.roi_out);
  return ops::normalize_rows(ops::linear(pooled, store.get("pretrain.slm.proj.w"), store.get("pretrain.slm.proj.b")));
}

template <typename T>
Tensor<T> slm_loss_from_features(const Tensor<T>& features, const Tensor<T>& targets, double tau) {
  if (features.rank() != 2 || features.shape() != targets.shape() || features.dim(0) < 2) {
    throw ShapeError("slm loss: features " + shape_str(features.shape()) + " vs targets " +
                     shape_str(targets.shape()));
  }
  if (!(tau > 0)) throw std::invalid_argument("slm loss: temperature must be positive");
  auto sims = ops::scale(ops::matmul(ops::normalize_rows(features), ops::transpose(targets)), T(1.0 / tau));
  std::vector<std::size_t> diag(features.dim(0));
  std::iota(diag.begin(), diag.end(), std::size_t{0});
  return ops::scale(ops::mean(ops::pick(ops::log_softmax(sims, 1), diag)), T(-1));
}

SegmentBatch sample_segments(const doc::DocPage& page, const PseudoTargets& targets, std::size_t max_segments,
                             std::uint64_t seed) {
  std::vector<std::size_t> usable;
  std::vector<std::vector<int>> ids(page.segments.size());
  for (std::size_t i = 0; i < page.segments.size(); ++i) {
    ids[i] = segment_token_ids(page, page.segments[i]);
    if (!ids[i].empty() && page.segments[i].box.valid()) usable.push_back(i);
  }
  if (max_segments > 0 && usable.size() > max_segments) {
    std::mt19937_64 rng(seed);
    std::shuffle(usable.begin(), usable.end(), rng);
    usable.resize(max_segments);
    std::sort(usable.begin(), usable.end());
  }
  SegmentBatch batch;
  for (std::size_t i : usable) {
    batch.boxes.push_back(page.segments[i].box);
    batch.targets.push_back(targets.target(ids[i]));
  }
  return batch;
}

template <typename T>
StepLosses<T> pretrain_losses(const doc::DocPage& page, const backbone::VgtConfig& model, ParamStore<T>& store,
                              const PretrainConfig& config, const PseudoTargets& targets, std::uint64_t seed) {
  StepLosses<T> out;
  grid::MaskOptions mask_options;
  mask_options.ratio = config.mask_ratio;
  const auto masked = grid::apply_mglm_mask(page.tokens, model.vocab_size, mask_options, mix_seed(seed, 1));
  const auto ids = grid::build_token_id_grid(masked.tokens, model.git.height, model.git.width);
  double stride = 0;
  const auto finest = finest_level(ids, model, store, stride);

  std::vector<Tensor<T>> parts;
  if (masked.plan.empty()) {
    out.mglm_skipped = true;
  } else {
    std::vector<doc::PixelBox> boxes;
    std::vector<int> labels;
    for (const auto& e : masked.plan.entries) {
      boxes.push_back(page.tokens[e.token].box);
      labels.push_back(e.original);
    }
    out.masked = boxes.size();
    out.mglm = cross_entropy(mglm_logits(finest, stride, boxes, store, config), labels);
    parts.push_back(config.mglm_weight == 1.0 ? out.mglm : ops::scale(out.mglm, T(config.mglm_weight)));
  }

  const auto batch = sample_segments(page, targets, config.max_segments, mix_seed(seed, 2));
  out.segments = batch.boxes.size();
  if (batch.boxes.size() < 2) {
    out.slm_skipped = true;
  } else {
    auto emb = slm_embeddings(finest, stride, batch.boxes, store, config);
    out.slm = slm_loss_from_features(emb, constant_matrix<T>(batch.targets), config.tau);
    parts.push_back(config.slm_weight == 1.0 ? out.slm : ops::scale(out.slm, T(config.slm_weight)));
  }

  if (parts.size() == 2) {
    out.total = ops::add(parts[0], parts[1]);
  } else if (parts.size() == 1) {
    out.total = parts[0];
  }
  return out;
}

template <typename T>
StepRecord pretrain_step(const doc::DocPage& page, const backbone::VgtConfig& model, ParamStore<T>& store,
                         const PretrainConfig& config, const PseudoTargets& targets, const AdamWHyper& hyper,
                         std::uint64_t seed) {
  Tape<T> tape;
  StepLosses<T> losses;
  {
    TapeScope<T> scope(tape);
    losses = pretrain_losses(page, model, store, config, targets, seed);
  }
  StepRecord rec;
  if (losses.mglm.defined()) rec.mglm = double(losses.mglm.item());
  if (losses.slm.defined()) rec.slm = double(losses.slm.item());
  if (!losses.total.defined()) return rec;
  rec.total = double(losses.total.item());
  backward(tape, losses.total, store);
  optimizer_step(store, hyper);
  return rec;
}

template <typename T>
std::vector<StepRecord> pretrain_run(const std::vector<doc::DocPage>& pages, const backbone::VgtConfig& model,
                                     ParamStore<T>& store, const PretrainConfig& config,
                                     const PretrainSchedule& schedule,
                                     const std::function<void(const StepRecord&)>& on_step) {
  if (pages.empty()) throw std::invalid_argument("pretrain_run: no pages");
  const PseudoTargets targets(model.vocab_size, config.target_dim, config.target_seed);
  const auto warmup = std::uint64_t(std::ceil(schedule.warmup_fraction * double(schedule.steps)));
  std::vector<StepRecord> records;
  records.reserve(schedule.steps);
  std::vector<std::size_t> order(pages.size());
  for (std::size_t step = 0; step < schedule.steps; ++step) {
    const std::size_t pos = step % pages.size();
    if (pos == 0) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::mt19937_64 rng(mix_seed(schedule.seed, step / pages.size()));
      std::shuffle(order.begin(), order.end(), rng);
    }
    AdamWHyper hyper;
    hyper.lr = warmup_lr(schedule.lr, step, warmup);
    hyper.weight_decay = schedule.weight_decay;
    auto rec = pretrain_step(pages[order[pos]], model, store, config, targets, hyper,
                             mix_seed(schedule.seed ^ 0x5851F42D4C957F2DULL, step));
    rec.step = step;
    records.push_back(rec);
    if (on_step) on_step(rec);
  }
  return records;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<StepRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,L_MGLM,L_SLM\n";
  out.precision(8);
  for (const auto& r : records) out << r.step << ',' << r.mglm << ',' << r.slm << '\n';
}

template <typename T>
PretrainMetrics evaluate_pretrain(const std::vector<doc::DocPage>& pages, const backbone::VgtConfig& model,
                                  ParamStore<T>& store, const PretrainConfig& config, std::size_t rounds,
                                  std::uint64_t seed) {
  const PseudoTargets targets(model.vocab_size, config.target_dim, config.target_seed);
  PretrainMetrics m;
  grid::MaskOptions mask_options;
  mask_options.ratio = config.mask_ratio;
  for (std::size_t p = 0; p < pages.size(); ++p) {
    const auto& page = pages[p];
    double stride = 0;
    for (std::size_t r = 0; r < rounds; ++r) {
      const auto masked =
          grid::apply_mglm_mask(page.tokens, model.vocab_size, mask_options, mix_seed(seed, p * rounds + r));
      if (masked.plan.empty()) continue;
      const auto finest =
          finest_level(grid::build_token_id_grid(masked.tokens, model.git.height, model.git.width), model, store, stride);
      std::vector<doc::PixelBox> boxes;
      for (const auto& e : masked.plan.entries) boxes.push_back(page.tokens[e.token].box);
      const auto logits = mglm_logits(finest, stride, boxes, store, config);
      const std::size_t v = logits.dim(1);
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const T* row = logits.data() + i * v;
        const auto best = std::size_t(std::max_element(row, row + v) - row);
        ++m.masked;
        if (int(best) == masked.plan.entries[i].original) ++m.masked_correct;
      }
    }
    const auto batch = sample_segments(page, targets, 0, 0);
    if (batch.boxes.size() < 2) continue;
    const auto finest =
        finest_level(grid::build_token_id_grid(page.tokens, model.git.height, model.git.width), model, store, stride);
    const auto emb = slm_embeddings(finest, stride, batch.boxes, store, config);
    const std::size_t n = batch.boxes.size(), d = config.target_dim;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> cos(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < d; ++j) cos[k] += double(emb.at(i * d + j)) * batch.targets[k][j];
      }
      bool strict = true;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i && cos[k] >= cos[i]) strict = false;
      }
      ++m.segments;
      if (strict) ++m.segments_aligned;
    }
  }
  return m;
}

#define VGT_INSTANTIATE(T)                                                                                      \
  template void init_pretrain_heads(ParamStore<T>&, std::size_t, std::size_t, const PretrainConfig&,            \
                                    std::uint64_t);                                                             \
  template Tensor<T> cross_entropy(const Tensor<T>&, const std::vector<int>&);                                  \
  template Tensor<T> mglm_logits(const Tensor<T>&, double, const std::vector<doc::PixelBox>&, ParamStore<T>&,   \
                                 const PretrainConfig&);                                                        \
  template Tensor<T> slm_embeddings(const Tensor<T>&, double, const std::vector<doc::PixelBox>&, ParamStore<T>&, \
                                    const PretrainConfig&);                                                     \
  template Tensor<T> slm_loss_from_features(const Tensor<T>&, const Tensor<T>&, double);                        \
  template StepLosses<T> pretrain_losses(const doc::DocPage&, const backbone::VgtConfig&, ParamStore<T>&,       \
                                         const PretrainConfig&, const PseudoTargets&, std::uint64_t);           \
  template StepRecord pretrain_step(const doc::DocPage&, const backbone::VgtConfig&, ParamStore<T>&,            \
                                    const PretrainConfig&, const PseudoTargets&, const AdamWHyper&,             \
                                    std::uint64_t);                                                             \
  template std::vector<StepRecord> pretrain_run(const std::vector<doc::DocPage>&, const backbone::VgtConfig&,   \
                                                ParamStore<T>&, const PretrainConfig&, const PretrainSchedule&, \
                                                const std::function<void(const StepRecord&)>&);                 \
  template PretrainMetrics evaluate_pretrain(const std::vector<doc::DocPage>&, const backbone::VgtConfig&,      \
                                             ParamStore<T>&, const PretrainConfig&, std::size_t, std::uint64_t);

VGT_INSTANTIATE(float)
VGT_INSTANTIATE(double)

}  // namespace vgt::pretrain
