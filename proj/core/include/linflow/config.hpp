#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "linflow/harness.hpp"

namespace linflow {

// Raised for anything wrong with a configuration: unreadable file, syntax
// errors (with line numbers), unknown or ill-typed keys, and semantic
// validation failures. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ParsedConfig {
    ExperimentConfig experiment;
    std::optional<SweepAxis> sweep;
};

// Parses the key = value / [section] format described in the README, applies
// `overrides` ("key=value" or "section.key=value") on top, fills the built-in
// defaults for everything omitted, and validates. An empty text yields the
// default experiment.
ParsedConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});

// Reads and parses a config file. A missing path (nullopt) starts from the
// built-in defaults.
ParsedConfig load_config(const std::optional<std::filesystem::path>& path,
                         std::span<const std::string> overrides = {});

}  // namespace linflow
