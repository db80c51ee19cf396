#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "vgt/backbone/vgt.h"
#include "vgt/core/optim.h"
#include "vgt/core/param_store.h"
#include "vgt/doc/types.h"
#include "vgt/grid/grid.h"

namespace vgt::pretrain {

struct PretrainConfig {
  double mask_ratio = 0.15;
  std::size_t roi_out = 3;
  std::size_t target_dim = 64;
  double tau = 0.01;
  std::size_t max_segments = 64;  // segments sampled per page
  std::size_t head_hidden = 0;    // 0 selects the pyramid width
  std::uint64_t target_seed = 20240101;
  double mglm_weight = 1.0;
  double slm_weight = 1.0;
};

/// Frozen bag-of-tokens text embedder: every token id owns a fixed Gaussian
/// row drawn from its own seeded stream; a segment maps to the L2-normalized
/// sum of its rows.
class PseudoTargets {
 public:
  PseudoTargets(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);
  std::size_t dim() const { return dim_; }
  const std::vector<double>& row(int token_id) const { return rows_.at(static_cast<std::size_t>(token_id)); }
  /// Throws std::invalid_argument on an empty token list.
  std::vector<double> target(const std::vector<int>& token_ids) const;

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> rows_;
};

/// Token ids of one segment, in word order.
std::vector<int> segment_token_ids(const doc::DocPage& page, const doc::Segment& segment);

/// Registers "pretrain.mglm.fc1/fc2" and "pretrain.slm.proj".
template <typename T>
void init_pretrain_heads(ParamStore<T>& store, std::size_t feature_dim, std::size_t vocab_size,
                         const PretrainConfig& config, std::uint64_t seed);

/// -(1/N) sum_i log softmax(logits_i)[target_i] over rows of logits [N, V].
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets);

/// MGLM head: pooled RoI features of the masked token boxes on the finest
/// level through a 2-layer MLP. Returns vocab logits [N_M, V].
template <typename T>
Tensor<T> mglm_logits(const Tensor<T>& finest, double stride, const std::vector<doc::PixelBox>& boxes,
                      ParamStore<T>& store, const PretrainConfig& config);

/// Contrastive loss between features [N, d] (any scale) and unit targets
/// [N, d]: row i's positive is target i, the other rows are its negatives.
template <typename T>
Tensor<T> slm_loss_from_features(const Tensor<T>& features, const Tensor<T>& targets, double tau);

/// Projected, L2-normalized segment features [N, target_dim].
template <typename T>
Tensor<T> slm_embeddings(const Tensor<T>& finest, double stride, const std::vector<doc::PixelBox>& boxes,
                         ParamStore<T>& store, const PretrainConfig& config);

template <typename T>
struct StepLosses {
  Tensor<T> mglm;  // undefined when nothing was masked
  Tensor<T> slm;   // undefined with fewer than two segments
  Tensor<T> total;
  std::size_t masked = 0;
  std::size_t segments = 0;
  bool mglm_skipped = false;
  bool slm_skipped = false;
};

/// Selected segments of a page (all of them, or max_segments drawn with the
/// seed) with their pseudo-targets.
struct SegmentBatch {
  std::vector<doc::PixelBox> boxes;
  std::vector<std::vector<double>> targets;
};
SegmentBatch sample_segments(const doc::DocPage& page, const PseudoTargets& targets, std::size_t max_segments,
                             std::uint64_t seed);

/// Forward pass of both objectives on one page (grid stream only).
template <typename T>
StepLosses<T> pretrain_losses(const doc::DocPage& page, const backbone::VgtConfig& model, ParamStore<T>& store,
                              const PretrainConfig& config, const PseudoTargets& targets, std::uint64_t seed);

struct StepRecord {
  std::size_t step = 0;
  double mglm = 0, slm = 0, total = 0;
};

struct PretrainSchedule {
  std::size_t steps = 2000;
  double lr = 1e-3;
  double warmup_fraction = 0.02;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

/// One optimizer step on one page. Skipped objectives contribute zero; with
/// no contributing objective the parameters are left untouched.
template <typename T>
StepRecord pretrain_step(const doc::DocPage& page, const backbone::VgtConfig& model, ParamStore<T>& store,
                         const PretrainConfig& config, const PseudoTargets& targets, const AdamWHyper& hyper,
                         std::uint64_t seed);

/// Cycles through pages in a per-epoch seeded order.
template <typename T>
std::vector<StepRecord> pretrain_run(const std::vector<doc::DocPage>& pages, const backbone::VgtConfig& model,
                                     ParamStore<T>& store, const PretrainConfig& config,
                                     const PretrainSchedule& schedule,
                                     const std::function<void(const StepRecord&)>& on_step = {});

void write_loss_csv(const std::filesystem::path& path, const std::vector<StepRecord>& records);

struct PretrainMetrics {
  std::size_t masked = 0, masked_correct = 0;
  std::size_t segments = 0, segments_aligned = 0;
  double mglm_accuracy() const { return masked ? double(masked_correct) / double(masked) : 0.0; }
  double slm_top1() const { return segments ? double(segments_aligned) / double(segments) : 0.0; }
};

/// Masked-token top-1 accuracy over `rounds` fresh masks per page, and the
/// share of segments whose own pseudo-target has strictly the highest cosine
/// among the page's candidates (computed on the unmasked grid).
template <typename T>
PretrainMetrics evaluate_pretrain(const std::vector<doc::DocPage>& pages, const backbone::VgtConfig& model,
                                  ParamStore<T>& store, const PretrainConfig& config, std::size_t rounds,
                                  std::uint64_t seed);

/// Stateless per-step seed derivation.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace vgt::pretrain
