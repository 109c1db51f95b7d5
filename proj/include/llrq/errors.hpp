#pragma once

#include <stdexcept>
#include <string>

namespace llrq {

// Invalid configuration or unsupported parameter combination.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Channel carries no information (h == 0).
struct DegenerateChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed alist content; line is 1-based.
struct AlistParseError : std::runtime_error {
  AlistParseError(const std::string& msg, int line)
      : std::runtime_error("alist parse error at line " + std::to_string(line) + ": " + msg),
        line_number(line) {}
  int line_number;
};

// Parity matrix unusable for encoding (rank deficient).
struct CodeConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training diverged; epoch is 0-based.
struct TrainingError : std::runtime_error {
  TrainingError(const std::string& msg, int epoch)
      : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch(epoch) {}
  int epoch;
};

// Quantizer fit failed (e.g. degenerate sample set).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weight/codebook container could not be loaded.
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace llrq
