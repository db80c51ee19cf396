#include <chrono>
#include <cmath>
#include <sstream>

#include "acceptance.h"
#include "vgt/core/ops.h"
#include "vgt/doc/synth.h"
#include "vgt/pretrain/pretrain.h"

namespace vgt::acceptance {

namespace {

// Desk run: 20 synthetic pages, vocabulary 64, grid stream only, 2,000 steps.
constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::uint64_t kBackboneSeed = 1;
constexpr std::uint64_t kHeadSeed = 101;
constexpr std::size_t kSteps = 2000;
constexpr double kLearningRate = 1e-3;
constexpr std::size_t kEvalRounds = 4;
constexpr std::uint64_t kEvalSeed = 99;

// All candidates equally similar: the contrastive loss is ln(K + 1).
double worst_symmetric_error() {
  double worst = 0.0;
  for (std::size_t n : {2, 4, 8, 64}) {
    std::vector<double> eye(n * n, 0.0), ones(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
    const auto loss = pretrain::slm_loss_from_features(Tensor<double>::from({n, n}, ones),
                                                       Tensor<double>::from({n, n}, eye), 0.01);
    worst = std::max(worst, std::abs(loss.item() - std::log(double(n))));
  }
  return worst;
}

PretrainArtifacts run_pretraining() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto vocab = doc::Vocab::load(std::string(VGT_DATA_DIR) + "/vocab_64.txt");
  const auto corpus = doc::synth_corpus({}, vocab, kCorpusSeed, 20);
  auto model = backbone::VgtConfig::desk(64, vocab.size());
  model.use_vision = false;
  const pretrain::PretrainConfig pc;
  PretrainArtifacts out;
  out.slm_identity_error = worst_symmetric_error();
  backbone::init_vgt_backbone(out.store, model, kBackboneSeed);
  pretrain::init_pretrain_heads(out.store, model.pyramid_channels(), model.vocab_size, pc, kHeadSeed);
  pretrain::PretrainSchedule schedule;
  schedule.steps = kSteps;
  schedule.lr = kLearningRate;
  pretrain::pretrain_run(corpus.pages, model, out.store, pc, schedule);
  const auto m = pretrain::evaluate_pretrain(corpus.pages, model, out.store, pc, kEvalRounds, kEvalSeed);
  out.mglm_accuracy = m.mglm_accuracy();
  out.slm_top1 = m.slm_top1();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

const PretrainArtifacts& pretrained() {
  static const PretrainArtifacts artifacts = run_pretraining();
  return artifacts;
}

Outcome check_mglm() {
  const auto& p = pretrained();
  std::ostringstream os;
  os.precision(4);
  os << "masked-token top-1 accuracy " << p.mglm_accuracy << " (need >= 0.90) after " << kSteps
     << " steps on 20 pages; " << p.seconds << " s (limit 300)";
  return {p.mglm_accuracy >= 0.90 && p.seconds < 300.0, os.str()};
}

Outcome check_slm() {
  const auto& p = pretrained();
  const double identity_err = p.slm_identity_error;
  std::ostringstream os;
  os.precision(4);
  os << "symmetric-case loss vs ln(K+1) max err " << std::scientific << identity_err << std::defaultfloat
     << "; positive strictly top cosine for " << p.slm_top1 << " of segments (need >= 0.95)";
  return {identity_err < 1e-12 && p.slm_top1 >= 0.95, os.str()};
}

}  // namespace vgt::acceptance
