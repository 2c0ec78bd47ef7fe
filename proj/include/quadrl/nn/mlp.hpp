#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "quadrl/common/random.hpp"

namespace quadrl::nn {

/// Output head. Gaussian emits [mean; clamped log-std], twice the action width.
enum class Head { Linear, Tanh, Gaussian };

const char* to_string(Head head);
Head parse_head(const std::string& text);

struct MlpShape {
  std::vector<int> widths;  // input, hidden..., output (action width for Gaussian)
  Head head = Head::Linear;
  double leaky_slope = 0.01;
  double log_std_min = -20.0;
  double log_std_max = 2.0;

  int input_size() const { return widths.front(); }
  /// Rows produced by forward().
  int output_rows() const { return head == Head::Gaussian ? 2 * widths.back() : widths.back(); }
  int layer_count() const { return static_cast<int>(widths.size()) - 1; }

  bool operator==(const MlpShape&) const = default;
};

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct Layer {
  Matrix<T> weight;  // out x in
  Vector<T> bias;
};

/// Per-layer parameter gradients plus the gradient with respect to the input batch.
template <typename T>
struct Gradients {
  std::vector<Layer<T>> layers;
  Matrix<T> input;
};

struct GradientRequest {
  bool parameters = true;
  bool input = false;
};

/// Fully connected network, LeakyReLU hidden layers. Batches are column-wise:
/// an input of shape (input_size x batch) yields (output_rows x batch).
template <typename T>
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix<T>> inputs;  // input to each affine layer
    std::vector<Matrix<T>> pre;     // affine output of each layer, before activation
    Matrix<T> output;
  };

  Mlp() = default;
  /// Zero parameters. Throws ShapeMismatch on fewer than two widths.
  explicit Mlp(MlpShape shape);

  /// Weights and biases uniform in +-1/sqrt(fan_in); when `final_range` > 0 the
  /// last layer is drawn from +-final_range instead.
  void initialize(RandomSource& rng, double final_range = 0.0);

  Matrix<T> forward(const Matrix<T>& x, Cache* cache = nullptr) const;
  Gradients<T> backward(const Cache& cache, const Matrix<T>& output_grad,
                        GradientRequest request = {}) const;

  const MlpShape& shape() const { return shape_; }
  std::vector<Layer<T>>& layers() { return layers_; }
  const std::vector<Layer<T>>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  /// Zero-valued gradient container matching this network.
  Gradients<T> zero_gradients() const;

 private:
  MlpShape shape_;
  std::vector<Layer<T>> layers_;
};

/// Parameter blocks in canonical order (W0, b0, W1, b1, ...), as flat spans.
template <typename T>
std::vector<Eigen::Map<Vector<T>>> parameter_blocks(std::vector<Layer<T>>& layers);
template <typename T>
std::vector<Eigen::Map<const Vector<T>>> parameter_blocks(const std::vector<Layer<T>>& layers);

/// target <- tau * online + (1 - tau) * target.
template <typename T>
void soft_update(Mlp<T>& target, const Mlp<T>& online, double tau);

extern template class Mlp<float>;
extern template class Mlp<double>;

}  // namespace quadrl::nn
