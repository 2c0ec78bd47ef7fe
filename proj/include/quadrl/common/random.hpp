#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace quadrl {

/// Seeded random source whose complete state (engine plus the normal
/// distribution's cached value) can be saved and restored.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0);

  /// Derive an independent stream, e.g. one for the environment and one for the agent.
  static RandomSource derive(std::uint64_t seed, std::uint64_t stream);

  double gaussian() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::string save() const;
  void load(const std::string& state);

  std::mt19937_64& engine() { return engine_; }

  friend bool operator==(const RandomSource& a, const RandomSource& b) {
    return a.engine_ == b.engine_ && a.normal_ == b.normal_;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace quadrl
