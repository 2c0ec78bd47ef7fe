#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "quadrl/rl/sac_agent.hpp"

namespace quadrl::rl {

nlohmann::json to_json(const SacConfig& c);
SacConfig sac_config_from_json(const nlohmann::json& j);

/// Agent checkpoint: a header block (magic "QRLSAC\0\1") carrying the SAC
/// configuration, temperature, update count and caller metadata, followed by the
/// five networks (actor, critic1, critic2, target1, target2) and the three network
/// optimizer states, each in the nn block format, then the temperature optimizer
/// (five little-endian f64: log_alpha, step, first, second, learning_rate).
template <typename T>
void save_agent(std::ostream& os, const SacAgent<T>& agent, const nlohmann::json& metadata = {});
template <typename T>
void save_agent(const std::filesystem::path& path, const SacAgent<T>& agent,
                const nlohmann::json& metadata = {});

/// Reads the header only, e.g. to learn the scalar type and action space.
nlohmann::json peek_checkpoint(const std::filesystem::path& path);

template <typename T>
SacAgent<T> load_agent(std::istream& is, nlohmann::json* metadata = nullptr);
template <typename T>
SacAgent<T> load_agent(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

}  // namespace quadrl::rl
