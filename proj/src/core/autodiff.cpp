#include "vgt/core/autodiff.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace vgt {

template <typename T>
void backward(Tape<T>& tape, const Tensor<T>& loss, ParamStore<T>& store) {
  store.zero_grad();
  tape.backward(loss);
}

double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / denom;
}

template <typename T>
GradCheckReport finite_difference_check(const std::function<Tensor<T>()>& f, ParamStore<T>& params,
                                        const GradCheckOptions& options) {
  if (options.eps < 1e-7 || options.eps > 1e-3) {
    throw std::invalid_argument("finite_difference_check: eps must lie in [1e-7, 1e-3]");
  }
  Tape<T> tape;
  Tensor<T> loss;
  {
    TapeScope<T> scope(tape);
    loss = f();
  }
  backward(tape, loss, params);

  const double base = static_cast<double>(loss.item());
  const double again = static_cast<double>(f().item());
  if (base != again) throw std::runtime_error("finite_difference_check: f is not deterministic");

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  const T eps = static_cast<T>(options.eps);
  for (auto& [name, p] : params) {
    Tensor<T>& t = p.tensor;
    if (!t.requires_grad()) continue;
    const std::vector<T> analytic(t.grad().begin(), t.grad().end());
    std::vector<std::size_t> coords(t.numel());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    auto values = t.mutable_values();
    for (std::size_t i : coords) {
      const T saved = values[i];
      values[i] = saved + eps;
      const double plus = static_cast<double>(f().item());
      values[i] = saved - eps;
      const double minus = static_cast<double>(f().item());
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double err = relative_error(static_cast<double>(analytic[i]), numeric);
      ++report.coords_checked;
      if (report.worst_param.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = name;
        report.worst_index = i;
        report.worst_analytic = static_cast<double>(analytic[i]);
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

template void backward<float>(Tape<float>&, const Tensor<float>&, ParamStore<float>&);
template void backward<double>(Tape<double>&, const Tensor<double>&, ParamStore<double>&);
template GradCheckReport finite_difference_check<float>(const std::function<Tensor<float>()>&,
                                                        ParamStore<float>&, const GradCheckOptions&);
template GradCheckReport finite_difference_check<double>(const std::function<Tensor<double>()>&,
                                                         ParamStore<double>&, const GradCheckOptions&);

}  // namespace vgt
