#pragma once

#include <stdexcept>
#include <string>

namespace pointproc {

// Precondition violations (argument out of the supported range).
struct BoundError : std::invalid_argument {
  explicit BoundError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Kernel spectrum outside [0, 1-eps].
struct SpectrumError : std::invalid_argument {
  explicit SpectrumError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Conditioning on a configuration of zero weight.
struct DegenerateConfigurationError : std::runtime_error {
  explicit DegenerateConfigurationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A model whose weights are all zero, or otherwise unusable.
struct InvalidModelError : std::invalid_argument {
  explicit InvalidModelError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A shift mapped two points of one configuration to the same image.
struct NonInjectiveShiftError : std::runtime_error {
  explicit NonInjectiveShiftError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation asked of a shift/model variant that does not support it.
struct UnsupportedVariantError : std::invalid_argument {
  explicit UnsupportedVariantError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Config file problems; carries a 1-based line number (0 = not line specific).
struct ConfigError : std::runtime_error {
  int line = 0;
  ConfigError(int line_, const std::string& msg)
      : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + msg : msg),
        line(line_) {}
};

}  // namespace pointproc
