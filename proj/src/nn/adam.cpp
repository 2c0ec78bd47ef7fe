#include "quadrl/nn/adam.hpp"

#include <cmath>

#include "quadrl/common/errors.hpp"

namespace quadrl::nn {

template <typename T>
AdamState<T> make_adam(const Mlp<T>& net, AdamParams params) {
  AdamState<T> s;
  s.params = params;
  s.first = net.zero_gradients().layers;
  s.second = s.first;
  return s;
}

template <typename T>
void adam_step(Mlp<T>& net, const Gradients<T>& grads, AdamState<T>& state) {
  auto params = parameter_blocks(net.layers());
  auto g = parameter_blocks(grads.layers);
  auto m = parameter_blocks(state.first);
  auto v = parameter_blocks(state.second);
  if (g.size() != params.size() || m.size() != params.size() || v.size() != params.size())
    throw ShapeMismatch("adam_step: gradient/moment layout does not match the network");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (g[i].size() != params[i].size() || m[i].size() != params[i].size() ||
        v[i].size() != params[i].size())
      throw ShapeMismatch("adam_step: block size mismatch");

  ++state.step;
  const AdamParams& p = state.params;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(p.beta1), b2 = static_cast<T>(p.beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(p.beta1, t));
  const T correction2 = static_cast<T>(1.0 - std::pow(p.beta2, t));
  const T lr = static_cast<T>(p.learning_rate), eps = static_cast<T>(p.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i].array() + (T(1) - b2) * g[i].array().square();
    params[i].array() -=
        lr * (m[i].array() / correction1) / ((v[i].array() / correction2).sqrt() + eps);
  }
}

void ScalarAdam::apply(double& value, double grad) {
  ++step;
  const double t = static_cast<double>(step);
  first = params.beta1 * first + (1.0 - params.beta1) * grad;
  second = params.beta2 * second + (1.0 - params.beta2) * grad * grad;
  const double m_hat = first / (1.0 - std::pow(params.beta1, t));
  const double v_hat = second / (1.0 - std::pow(params.beta2, t));
  value -= params.learning_rate * m_hat / (std::sqrt(v_hat) + params.epsilon);
}

template AdamState<float> make_adam(const Mlp<float>&, AdamParams);
template AdamState<double> make_adam(const Mlp<double>&, AdamParams);
template void adam_step(Mlp<float>&, const Gradients<float>&, AdamState<float>&);
template void adam_step(Mlp<double>&, const Gradients<double>&, AdamState<double>&);

}  // namespace quadrl::nn
