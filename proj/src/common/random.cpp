#include "quadrl/common/random.hpp"

#include <sstream>

#include "quadrl/common/errors.hpp"

namespace quadrl {

RandomSource::RandomSource(std::uint64_t seed) : engine_(seed) {}

RandomSource RandomSource::derive(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  RandomSource rs;
  rs.engine_.seed(seq);
  return rs;
}

std::string RandomSource::save() const {
  std::ostringstream os;
  os.precision(17);
  os << engine_ << ' ' << normal_;
  return os.str();
}

void RandomSource::load(const std::string& state) {
  std::istringstream is(state);
  is >> engine_ >> normal_;
  if (!is) throw SchemaError("invalid random state");
}

}  // namespace quadrl
