#pragma once

#include <filesystem>
#include <string>

#include "lagnet/netcore/network.hpp"

namespace lagnet::netcore {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  NetworkConfig config;
  InputTransform transform;
  ParameterSet parameters;

  Network network() const { return Network(config, transform); }
};

/// JSON text with every double printed to 17 significant digits, so a
/// write/read round trip is bit-exact.
std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const std::string& text);

/// Writes atomically (temporary file, then rename). Throws IoError.
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
/// Throws IoError when unreadable, UsageError when malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lagnet::netcore
