#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vgt/core/param_store.h"

namespace vgt {

// Checkpoint layout:
//   VGTCKPT 1\n
//   <count>\n
//   <name> <f32|f64> <rank> <d0> ... <dn>\n     (one line per tensor, sorted by name)
//   DATA\n
//   raw little-endian values, tensors concatenated in header order
struct CheckpointEntry {
  std::string dtype;
  Shape shape;
  std::vector<double> values;
};

using Checkpoint = std::map<std::string, CheckpointEntry>;

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ParamStore<T>& store);

Checkpoint read_checkpoint(const std::filesystem::path& path);

struct LoadReport {
  std::vector<std::string> loaded;
  // Model parameters under a requested prefix that the checkpoint lacks.
  std::vector<std::string> missing;
  // Checkpoint tensors outside the requested prefixes or absent from the model.
  std::vector<std::string> unused;
};

/// Copies checkpoint tensors whose names start with one of the prefixes into
/// the store. Shape mismatches throw.
template <typename T>
LoadReport load_into(const Checkpoint& ckpt, ParamStore<T>& store, const std::vector<std::string>& prefixes);

}  // namespace vgt
