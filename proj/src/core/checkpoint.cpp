#include "vgt/core/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vgt {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

bool has_prefix(const std::string& name, const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return name.rfind(p, 0) == 0; });
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ParamStore<T>& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << "VGTCKPT 1\n" << store.size() << '\n';
  for (const auto& [name, p] : store) {
    out << name << ' ' << dtype_name<T>() << ' ' << p.tensor.rank();
    for (auto d : p.tensor.shape()) out << ' ' << d;
    out << '\n';
  }
  out << "DATA\n";
  for (const auto& [name, p] : store) {
    out.write(reinterpret_cast<const char*>(p.tensor.data()),
              static_cast<std::streamsize>(p.tensor.numel() * sizeof(T)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "VGTCKPT 1") throw std::runtime_error("not a checkpoint file: " + path.string());
  std::getline(in, line);
  const std::size_t count = std::stoul(line);
  std::vector<std::pair<std::string, CheckpointEntry>> order;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated checkpoint header");
    std::istringstream ls(line);
    std::string name;
    CheckpointEntry e;
    std::size_t rank = 0;
    ls >> name >> e.dtype >> rank;
    if (!ls || (e.dtype != "f32" && e.dtype != "f64")) {
      throw std::runtime_error("bad checkpoint header line: " + line);
    }
    e.shape.resize(rank);
    for (auto& d : e.shape) ls >> d;
    if (!ls) throw std::runtime_error("bad checkpoint header line: " + line);
    order.emplace_back(std::move(name), std::move(e));
  }
  std::getline(in, line);
  if (line != "DATA") throw std::runtime_error("checkpoint missing DATA marker");
  Checkpoint ckpt;
  for (auto& [name, e] : order) {
    const std::size_t n = shape_numel(e.shape);
    e.values.resize(n);
    if (e.dtype == "f32") {
      std::vector<float> buf(n);
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
      std::copy(buf.begin(), buf.end(), e.values.begin());
    } else {
      in.read(reinterpret_cast<char*>(e.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!in) throw std::runtime_error("truncated checkpoint data for " + name);
    ckpt.emplace(std::move(name), std::move(e));
  }
  return ckpt;
}

template <typename T>
LoadReport load_into(const Checkpoint& ckpt, ParamStore<T>& store, const std::vector<std::string>& prefixes) {
  LoadReport report;
  for (const auto& [name, e] : ckpt) {
    if (!has_prefix(name, prefixes) || !store.contains(name)) {
      report.unused.push_back(name);
      continue;
    }
    Tensor<T>& t = store.get(name);
    if (t.shape() != e.shape) {
      throw std::runtime_error("checkpoint tensor " + name + " has shape " + shape_str(e.shape) +
                               ", model expects " + shape_str(t.shape()));
    }
    auto dst = t.mutable_values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(e.values[i]);
    report.loaded.push_back(name);
  }
  for (const auto& name : store.names()) {
    if (has_prefix(name, prefixes) && !ckpt.count(name)) report.missing.push_back(name);
  }
  return report;
}

template void save_checkpoint<float>(const std::filesystem::path&, const ParamStore<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const ParamStore<double>&);
template LoadReport load_into<float>(const Checkpoint&, ParamStore<float>&, const std::vector<std::string>&);
template LoadReport load_into<double>(const Checkpoint&, ParamStore<double>&, const std::vector<std::string>&);

}  // namespace vgt
