#include "quadrl/nn/mlp.hpp"

#include <cmath>

#include "quadrl/common/errors.hpp"

namespace quadrl::nn {

const char* to_string(Head head) {
  switch (head) {
    case Head::Linear: return "linear";
    case Head::Tanh: return "tanh";
    case Head::Gaussian: return "gaussian";
  }
  return "unknown";
}

Head parse_head(const std::string& text) {
  if (text == "linear") return Head::Linear;
  if (text == "tanh") return Head::Tanh;
  if (text == "gaussian") return Head::Gaussian;
  throw SchemaError("unknown network head '" + text + "'");
}

template <typename T>
Mlp<T>::Mlp(MlpShape shape) : shape_(std::move(shape)) {
  if (shape_.widths.size() < 2) throw ShapeMismatch("an MLP needs at least input and output widths");
  for (int w : shape_.widths)
    if (w <= 0) throw ShapeMismatch("MLP widths must be positive");
  const int n = shape_.layer_count();
  layers_.resize(n);
  for (int l = 0; l < n; ++l) {
    const int out = l + 1 == n ? shape_.output_rows() : shape_.widths[l + 1];
    layers_[l].weight = Matrix<T>::Zero(out, shape_.widths[l]);
    layers_[l].bias = Vector<T>::Zero(out);
  }
}

template <typename T>
void Mlp<T>::initialize(RandomSource& rng, double final_range) {
  const std::size_t n = layers_.size();
  for (std::size_t l = 0; l < n; ++l) {
    const double range = (l + 1 == n && final_range > 0.0)
                             ? final_range
                             : 1.0 / std::sqrt(static_cast<double>(shape_.widths[l]));
    auto& layer = layers_[l];
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        layer.weight(r, c) = static_cast<T>(rng.uniform(-range, range));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
      layer.bias[r] = static_cast<T>(rng.uniform(-range, range));
  }
}

template <typename T>
std::size_t Mlp<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

template <typename T>
Gradients<T> Mlp<T>::zero_gradients() const {
  Gradients<T> g;
  g.layers.reserve(layers_.size());
  for (const auto& l : layers_)
    g.layers.push_back({Matrix<T>::Zero(l.weight.rows(), l.weight.cols()),
                        Vector<T>::Zero(l.bias.size())});
  return g;
}

template <typename T>
Matrix<T> Mlp<T>::forward(const Matrix<T>& x, Cache* cache) const {
  if (x.rows() != shape_.input_size())
    throw ShapeMismatch("MLP input has " + std::to_string(x.rows()) + " rows, expected " +
                        std::to_string(shape_.input_size()));
  const T slope = static_cast<T>(shape_.leaky_slope);
  const std::size_t n = layers_.size();
  if (cache) {
    cache->inputs.resize(n);
    cache->pre.resize(n);
  }

  Matrix<T> act = x;
  for (std::size_t l = 0; l < n; ++l) {
    Matrix<T> z = layers_[l].weight * act;
    z.colwise() += layers_[l].bias;
    if (cache) cache->inputs[l] = std::move(act);
    if (l + 1 < n) {
      act = z.array().max(z.array() * slope);
    } else {
      switch (shape_.head) {
        case Head::Linear: act = z; break;
        case Head::Tanh: act = z.array().tanh(); break;
        case Head::Gaussian: {
          act = z;
          const int d = shape_.widths.back();
          act.bottomRows(d) = act.bottomRows(d).array().max(static_cast<T>(shape_.log_std_min))
                                  .min(static_cast<T>(shape_.log_std_max));
          break;
        }
      }
    }
    if (cache) cache->pre[l] = std::move(z);
  }
  if (cache) cache->output = act;
  return act;
}

template <typename T>
Gradients<T> Mlp<T>::backward(const Cache& cache, const Matrix<T>& output_grad,
                              GradientRequest request) const {
  const std::size_t n = layers_.size();
  if (cache.pre.size() != n || cache.inputs.size() != n)
    throw ShapeMismatch("activation cache does not match network depth");
  if (output_grad.rows() != shape_.output_rows() || output_grad.cols() != cache.output.cols())
    throw ShapeMismatch("output gradient shape does not match the cached forward pass");

  Gradients<T> grads;
  if (request.parameters) grads.layers.resize(n);

  Matrix<T> dz = output_grad;
  switch (shape_.head) {
    case Head::Linear: break;
    case Head::Tanh:
      dz.array() *= (T(1) - cache.output.array().square());
      break;
    case Head::Gaussian: {
      const int d = shape_.widths.back();
      const auto pre = cache.pre.back().bottomRows(d).array();
      const T lo = static_cast<T>(shape_.log_std_min), hi = static_cast<T>(shape_.log_std_max);
      dz.bottomRows(d) = ((pre >= lo) && (pre <= hi)).select(dz.bottomRows(d).array(), T(0));
      break;
    }
  }

  const T slope = static_cast<T>(shape_.leaky_slope);
  for (std::size_t i = n; i-- > 0;) {
    if (request.parameters) {
      grads.layers[i].weight.noalias() = dz * cache.inputs[i].transpose();
      grads.layers[i].bias = dz.rowwise().sum();
    }
    if (i == 0) {
      if (request.input) grads.input.noalias() = layers_[0].weight.transpose() * dz;
      break;
    }
    Matrix<T> dx = layers_[i].weight.transpose() * dz;
    dz = (cache.pre[i - 1].array() > T(0)).select(dx.array(), dx.array() * slope);
  }
  return grads;
}

template <typename T>
std::vector<Eigen::Map<Vector<T>>> parameter_blocks(std::vector<Layer<T>>& layers) {
  std::vector<Eigen::Map<Vector<T>>> out;
  out.reserve(layers.size() * 2);
  for (auto& l : layers) {
    out.emplace_back(l.weight.data(), l.weight.size());
    out.emplace_back(l.bias.data(), l.bias.size());
  }
  return out;
}

template <typename T>
std::vector<Eigen::Map<const Vector<T>>> parameter_blocks(const std::vector<Layer<T>>& layers) {
  std::vector<Eigen::Map<const Vector<T>>> out;
  out.reserve(layers.size() * 2);
  for (const auto& l : layers) {
    out.emplace_back(l.weight.data(), l.weight.size());
    out.emplace_back(l.bias.data(), l.bias.size());
  }
  return out;
}

template <typename T>
void soft_update(Mlp<T>& target, const Mlp<T>& online, double tau) {
  if (!(target.shape() == online.shape()))
    throw ShapeMismatch("soft_update between networks of different shapes");
  const T keep = static_cast<T>(1.0 - tau), mix = static_cast<T>(tau);
  auto dst = parameter_blocks(target.layers());
  auto src = parameter_blocks(online.layers());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = keep * dst[i] + mix * src[i];
}

template class Mlp<float>;
template class Mlp<double>;
template std::vector<Eigen::Map<Vector<float>>> parameter_blocks(std::vector<Layer<float>>&);
template std::vector<Eigen::Map<Vector<double>>> parameter_blocks(std::vector<Layer<double>>&);
template std::vector<Eigen::Map<const Vector<float>>> parameter_blocks(
    const std::vector<Layer<float>>&);
template std::vector<Eigen::Map<const Vector<double>>> parameter_blocks(
    const std::vector<Layer<double>>&);
template void soft_update(Mlp<float>&, const Mlp<float>&, double);
template void soft_update(Mlp<double>&, const Mlp<double>&, double);

}  // namespace quadrl::nn
