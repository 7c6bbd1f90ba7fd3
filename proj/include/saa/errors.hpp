#pragma once

#include <stdexcept>
#include <string>

namespace saa {

// Bad config files, flags, or run directories. The CLI maps this to exit 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated dataset/checkpoint/metrics files.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Runtime aborts (non-finite losses, bad ids). Exit 1 at the CLI.
class TrainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace saa
