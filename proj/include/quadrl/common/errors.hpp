#pragma once

#include <stdexcept>
#include <string>

namespace quadrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Integration produced NaN or Inf; the episode must be terminated.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

class BufferTooSmall : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class ModeMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incompatible CSV / checkpoint content.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace quadrl
