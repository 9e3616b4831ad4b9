#pragma once

// Run configuration files for lagcli subcommands.
//
// A config file is TOML (anything that does not start with '{') or a JSON
// object. Keys are option long names without dashes, either at the top level
// or inside a section / nested object named after the subcommand. Values given
// on the command line win over the file.

#include <filesystem>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace lagnet::cli {

struct ConfigEntry {
  std::string key;
  std::vector<std::string> values;
};

/// Parses the text; throws FormatError on malformed content.
std::vector<ConfigEntry> parse_config(const std::string& text, const std::string& subcommand);
std::vector<ConfigEntry> load_config(const std::filesystem::path& path, const std::string& subcommand);

/// Fills every option of `app` that was not given on the command line.
/// Unknown keys raise UsageError.
void apply_config(CLI::App& app, const std::vector<ConfigEntry>& entries);

}  // namespace lagnet::cli
