#pragma once

#include <stdexcept>
#include <string>

namespace misbelief {

// Bad user configuration (scenario files, CLI flags). The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace misbelief
