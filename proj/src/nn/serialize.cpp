#include "quadrl/nn/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "quadrl/common/errors.hpp"

namespace quadrl::nn {

namespace {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(U)];
    std::memcpy(bytes, &v, sizeof(U));
    std::reverse(bytes, bytes + sizeof(U));
    std::memcpy(&v, bytes, sizeof(U));
  }
  return v;
}

void check_stream(const std::ios& s, const char* what) {
  if (!s) throw SchemaError(std::string("truncated or unreadable ") + what);
}

// Row-major write of a column-major Eigen matrix.
template <typename T>
void write_matrix(std::ostream& os, const Matrix<T>& m) {
  const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  write_scalars(os, rm.data(), static_cast<std::size_t>(rm.size()));
}

template <typename T>
void read_matrix(std::istream& is, Matrix<T>& m) {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(m.rows(), m.cols());
  read_scalars(is, rm.data(), static_cast<std::size_t>(rm.size()));
  m = rm;
}

template <typename T>
void write_layers(std::ostream& os, const std::vector<Layer<T>>& layers) {
  for (const auto& l : layers) {
    write_matrix(os, l.weight);
    write_scalars(os, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

template <typename T>
void read_layers(std::istream& is, std::vector<Layer<T>>& layers) {
  for (auto& l : layers) {
    read_matrix(is, l.weight);
    read_scalars(is, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

constexpr std::string_view kMlpMagic{"QRLMLP\x00\x01", 8};
constexpr std::string_view kAdamMagic{"QRLADM\x00\x01", 8};

}  // namespace

void write_block_header(std::ostream& os, std::string_view magic, const nlohmann::json& header) {
  const std::string text = header.dump();
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  const std::uint64_t len = to_little(static_cast<std::uint64_t>(text.size()));
  os.write(reinterpret_cast<const char*>(&len), sizeof(len));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

nlohmann::json read_block_header(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(got.size()));
  check_stream(is, "block magic");
  if (got != magic) throw SchemaError("unexpected block magic in binary file");
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof(len));
  check_stream(is, "block header length");
  len = to_little(len);
  if (len > (1u << 24)) throw SchemaError("block header too large");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  check_stream(is, "block header");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed block header: ") + e.what());
  }
}

template <typename T>
void write_scalars(std::ostream& os, const T* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const T v = to_little(data[i]);
      os.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
  }
}

template <typename T>
void read_scalars(std::istream& is, T* data, std::size_t count) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  check_stream(is, "parameter payload");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < count; ++i) data[i] = to_little(data[i]);
}

nlohmann::json shape_to_json(const MlpShape& shape) {
  return {{"widths", shape.widths},
          {"head", to_string(shape.head)},
          {"leaky_slope", shape.leaky_slope},
          {"log_std_min", shape.log_std_min},
          {"log_std_max", shape.log_std_max}};
}

MlpShape shape_from_json(const nlohmann::json& j) {
  try {
    MlpShape s;
    s.widths = j.at("widths").get<std::vector<int>>();
    s.head = parse_head(j.at("head").get<std::string>());
    s.leaky_slope = j.at("leaky_slope").get<double>();
    s.log_std_min = j.at("log_std_min").get<double>();
    s.log_std_max = j.at("log_std_max").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("network header: ") + e.what());
  }
}

template <typename T>
void write_mlp(std::ostream& os, const Mlp<T>& net) {
  nlohmann::json h = shape_to_json(net.shape());
  h["scalar"] = scalar_name<T>();
  h["parameter_count"] = net.parameter_count();
  write_block_header(os, kMlpMagic, h);
  write_layers(os, net.layers());
}

template <typename T>
Mlp<T> read_mlp(std::istream& is) {
  const nlohmann::json h = read_block_header(is, kMlpMagic);
  if (h.value("scalar", std::string{}) != scalar_name<T>())
    throw SchemaError("network stored as " + h.value("scalar", std::string{"?"}) +
                      ", expected " + std::string(scalar_name<T>()));
  Mlp<T> net(shape_from_json(h));
  if (h.value("parameter_count", std::size_t{0}) != net.parameter_count())
    throw SchemaError("network parameter count does not match its widths");
  read_layers(is, net.layers());
  return net;
}

template <typename T>
void write_adam(std::ostream& os, const AdamState<T>& s) {
  const nlohmann::json h = {{"scalar", scalar_name<T>()},
                            {"step", s.step},
                            {"learning_rate", s.params.learning_rate},
                            {"beta1", s.params.beta1},
                            {"beta2", s.params.beta2},
                            {"epsilon", s.params.epsilon}};
  write_block_header(os, kAdamMagic, h);
  write_layers(os, s.first);
  write_layers(os, s.second);
}

template <typename T>
AdamState<T> read_adam(std::istream& is, const Mlp<T>& net) {
  const nlohmann::json h = read_block_header(is, kAdamMagic);
  if (h.value("scalar", std::string{}) != scalar_name<T>())
    throw SchemaError("optimizer state has the wrong scalar type");
  AdamParams p;
  try {
    p.learning_rate = h.at("learning_rate").get<double>();
    p.beta1 = h.at("beta1").get<double>();
    p.beta2 = h.at("beta2").get<double>();
    p.epsilon = h.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("optimizer header: ") + e.what());
  }
  AdamState<T> s = make_adam(net, p);
  s.step = h.value("step", std::int64_t{0});
  read_layers(is, s.first);
  read_layers(is, s.second);
  return s;
}

template void write_scalars(std::ostream&, const float*, std::size_t);
template void write_scalars(std::ostream&, const double*, std::size_t);
template void read_scalars(std::istream&, float*, std::size_t);
template void read_scalars(std::istream&, double*, std::size_t);
template void write_mlp(std::ostream&, const Mlp<float>&);
template void write_mlp(std::ostream&, const Mlp<double>&);
template Mlp<float> read_mlp(std::istream&);
template Mlp<double> read_mlp(std::istream&);
template void write_adam(std::ostream&, const AdamState<float>&);
template void write_adam(std::ostream&, const AdamState<double>&);
template AdamState<float> read_adam(std::istream&, const Mlp<float>&);
template AdamState<double> read_adam(std::istream&, const Mlp<double>&);

}  // namespace quadrl::nn
