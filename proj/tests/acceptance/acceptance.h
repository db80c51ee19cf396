#pragma once

#include <memory>
#include <string>

#include "vgt/core/param_store.h"

namespace vgt::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Pretrained grid-stream weights shared by the pretraining and two-stream
/// checks.
struct PretrainArtifacts {
  ParamStore<float> store;
  double slm_identity_error = 0.0;  // measured before training starts
  double mglm_accuracy = 0.0;
  double slm_top1 = 0.0;
  double seconds = 0.0;
};

/// Runs the desk pretraining once and caches the result.
const PretrainArtifacts& pretrained();

Outcome check_grid();                 // C1
Outcome check_gradients();            // C2
Outcome check_roi();                  // C3
Outcome check_mglm();                 // C4
Outcome check_slm();                  // C5
Outcome check_map_oracle();           // C6
Outcome check_two_stream();           // C7
Outcome check_cli_determinism();      // C8

}  // namespace vgt::acceptance
