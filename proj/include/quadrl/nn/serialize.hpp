#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "quadrl/nn/adam.hpp"
#include "quadrl/nn/mlp.hpp"

namespace quadrl::nn {

/// Binary layout shared by every serialized block:
///
///   8 bytes   magic (block specific)
///   u64 LE    header length in bytes
///   ...       UTF-8 JSON header
///   ...       payload, little-endian scalars
///
/// Network payload: for each layer, the weight matrix row-major followed by the bias.
/// Adam payload: first moments in network order, then second moments.

template <typename T>
constexpr std::string_view scalar_name();
template <>
constexpr std::string_view scalar_name<float>() { return "f32"; }
template <>
constexpr std::string_view scalar_name<double>() { return "f64"; }

void write_block_header(std::ostream& os, std::string_view magic, const nlohmann::json& header);
/// Reads and checks the magic, returns the parsed header. Throws SchemaError.
nlohmann::json read_block_header(std::istream& is, std::string_view magic);

template <typename T>
void write_scalars(std::ostream& os, const T* data, std::size_t count);
template <typename T>
void read_scalars(std::istream& is, T* data, std::size_t count);

nlohmann::json shape_to_json(const MlpShape& shape);
MlpShape shape_from_json(const nlohmann::json& j);

template <typename T>
void write_mlp(std::ostream& os, const Mlp<T>& net);
template <typename T>
Mlp<T> read_mlp(std::istream& is);

template <typename T>
void write_adam(std::ostream& os, const AdamState<T>& state);
/// `net` supplies the expected moment shapes.
template <typename T>
AdamState<T> read_adam(std::istream& is, const Mlp<T>& net);

}  // namespace quadrl::nn
