#pragma once

#include <cstdint>
#include <vector>

#include "quadrl/nn/mlp.hpp"

namespace quadrl::nn {

struct AdamParams {
  double learning_rate = 7e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamParams&) const = default;
};

template <typename T>
struct AdamState {
  AdamParams params;
  std::int64_t step = 0;
  std::vector<Layer<T>> first;
  std::vector<Layer<T>> second;
};

template <typename T>
AdamState<T> make_adam(const Mlp<T>& net, AdamParams params);

/// Bias-corrected Adam update of every weight and bias in `net`.
template <typename T>
void adam_step(Mlp<T>& net, const Gradients<T>& grads, AdamState<T>& state);

/// Adam for a single scalar parameter such as the log temperature.
struct ScalarAdam {
  AdamParams params;
  std::int64_t step = 0;
  double first = 0.0;
  double second = 0.0;

  void apply(double& value, double grad);
};

extern template AdamState<float> make_adam(const Mlp<float>&, AdamParams);
extern template AdamState<double> make_adam(const Mlp<double>&, AdamParams);
extern template void adam_step(Mlp<float>&, const Gradients<float>&, AdamState<float>&);
extern template void adam_step(Mlp<double>&, const Gradients<double>&, AdamState<double>&);

}  // namespace quadrl::nn
