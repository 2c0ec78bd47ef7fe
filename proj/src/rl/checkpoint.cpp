#include "quadrl/rl/checkpoint.hpp"

#include <fstream>

#include "quadrl/common/errors.hpp"
#include "quadrl/nn/serialize.hpp"

namespace quadrl::rl {

namespace {

constexpr std::string_view kAgentMagic{"QRLSAC\x00\x01", 8};

}  // namespace

nlohmann::json to_json(const SacConfig& c) {
  nlohmann::json j = {{"learning_rate", c.learning_rate},
                      {"buffer_capacity", c.buffer_capacity},
                      {"learning_starts", c.learning_starts},
                      {"batch_size", c.batch_size},
                      {"tau", c.tau},
                      {"gamma", c.gamma},
                      {"updates_per_step", c.updates_per_step},
                      {"hidden", c.hidden},
                      {"leaky_slope", c.leaky_slope},
                      {"log_std_min", c.log_std_min},
                      {"log_std_max", c.log_std_max},
                      {"initial_alpha", c.initial_alpha},
                      {"final_layer_init", c.final_layer_init}};
  j["target_entropy"] = c.target_entropy ? nlohmann::json(*c.target_entropy) : nlohmann::json();
  return j;
}

SacConfig sac_config_from_json(const nlohmann::json& j) {
  try {
    SacConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
    c.learning_starts = j.at("learning_starts").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.tau = j.at("tau").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.updates_per_step = j.at("updates_per_step").get<int>();
    c.hidden = j.at("hidden").get<std::vector<int>>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.log_std_min = j.at("log_std_min").get<double>();
    c.log_std_max = j.at("log_std_max").get<double>();
    c.initial_alpha = j.at("initial_alpha").get<double>();
    c.final_layer_init = j.at("final_layer_init").get<double>();
    if (!j.at("target_entropy").is_null()) c.target_entropy = j.at("target_entropy").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("sac config in checkpoint: ") + e.what());
  }
}

template <typename T>
void save_agent(std::ostream& os, const SacAgent<T>& agent, const nlohmann::json& metadata) {
  nlohmann::json h = {{"format", "quadrl-sac"},
                      {"version", 1},
                      {"scalar", nn::scalar_name<T>()},
                      {"action_dim", agent.action_dim},
                      {"target_entropy", agent.target_entropy},
                      {"updates", agent.updates},
                      {"sac", to_json(agent.config)},
                      {"metadata", metadata}};
  nn::write_block_header(os, kAgentMagic, h);
  for (const auto* net : {&agent.actor, &agent.critic1, &agent.critic2, &agent.target1, &agent.target2})
    nn::write_mlp(os, *net);
  nn::write_adam(os, agent.actor_opt);
  nn::write_adam(os, agent.critic1_opt);
  nn::write_adam(os, agent.critic2_opt);
  const double alpha_state[5] = {agent.log_alpha, static_cast<double>(agent.alpha_opt.step),
                                 agent.alpha_opt.first, agent.alpha_opt.second,
                                 agent.alpha_opt.params.learning_rate};
  nn::write_scalars(os, alpha_state, 5);
  if (!os) throw Error("failed writing agent checkpoint");
}

template <typename T>
void save_agent(const std::filesystem::path& path, const SacAgent<T>& agent,
                const nlohmann::json& metadata) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    save_agent(os, agent, metadata);
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json peek_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SchemaError("cannot open checkpoint " + path.string());
  return nn::read_block_header(is, kAgentMagic);
}

template <typename T>
SacAgent<T> load_agent(std::istream& is, nlohmann::json* metadata) {
  const nlohmann::json h = nn::read_block_header(is, kAgentMagic);
  if (h.value("format", std::string{}) != "quadrl-sac")
    throw SchemaError("not an agent checkpoint");
  if (h.value("scalar", std::string{}) != nn::scalar_name<T>())
    throw SchemaError("checkpoint scalar type is " + h.value("scalar", std::string{"?"}) +
                      ", expected " + std::string(nn::scalar_name<T>()));
  const int action_dim = h.at("action_dim").get<int>();
  SacAgent<T> agent(action_dim, sac_config_from_json(h.at("sac")), 0);
  agent.target_entropy = h.at("target_entropy").get<double>();
  agent.updates = h.at("updates").get<std::int64_t>();

  for (auto* net : {&agent.actor, &agent.critic1, &agent.critic2, &agent.target1, &agent.target2}) {
    auto loaded = nn::read_mlp<T>(is);
    if (!(loaded.shape() == net->shape()))
      throw SchemaError("checkpoint network shape does not match its sac config");
    *net = std::move(loaded);
  }
  agent.actor_opt = nn::read_adam(is, agent.actor);
  agent.critic1_opt = nn::read_adam(is, agent.critic1);
  agent.critic2_opt = nn::read_adam(is, agent.critic2);
  double alpha_state[5];
  nn::read_scalars(is, alpha_state, 5);
  agent.log_alpha = alpha_state[0];
  agent.alpha_opt.step = static_cast<std::int64_t>(alpha_state[1]);
  agent.alpha_opt.first = alpha_state[2];
  agent.alpha_opt.second = alpha_state[3];
  agent.alpha_opt.params.learning_rate = alpha_state[4];
  if (metadata) *metadata = h.value("metadata", nlohmann::json::object());
  return agent;
}

template <typename T>
SacAgent<T> load_agent(const std::filesystem::path& path, nlohmann::json* metadata) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SchemaError("cannot open checkpoint " + path.string());
  return load_agent<T>(is, metadata);
}

template void save_agent(std::ostream&, const SacAgent<float>&, const nlohmann::json&);
template void save_agent(std::ostream&, const SacAgent<double>&, const nlohmann::json&);
template void save_agent(const std::filesystem::path&, const SacAgent<float>&, const nlohmann::json&);
template void save_agent(const std::filesystem::path&, const SacAgent<double>&, const nlohmann::json&);
template SacAgent<float> load_agent(std::istream&, nlohmann::json*);
template SacAgent<double> load_agent(std::istream&, nlohmann::json*);
template SacAgent<float> load_agent(const std::filesystem::path&, nlohmann::json*);
template SacAgent<double> load_agent(const std::filesystem::path&, nlohmann::json*);

}  // namespace quadrl::rl
