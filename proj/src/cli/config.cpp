#include "lagnet/cli/config.hpp"

#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lagnet/errors.hpp"
#include "lagnet/textio.hpp"

namespace lagnet::cli {

namespace {

std::string scalar_text(const nlohmann::ordered_json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  throw FormatError("config value for '" + key + "' must be a string, number, boolean or array of those", 0);
}

void add_json_entries(const nlohmann::ordered_json& obj, std::vector<ConfigEntry>& out) {
  for (const auto& [key, v] : obj.items()) {
    if (v.is_object()) continue;  // sections for other subcommands
    ConfigEntry e{key, {}};
    if (v.is_array()) {
      for (const auto& x : v) e.values.push_back(scalar_text(x, key));
    } else {
      e.values.push_back(scalar_text(v, key));
    }
    out.push_back(std::move(e));
  }
}

std::vector<ConfigEntry> parse_json(const std::string& text, const std::string& subcommand) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  if (!doc.is_object()) throw FormatError("config must be a JSON object", 0);
  std::vector<ConfigEntry> out;
  add_json_entries(doc, out);
  if (doc.contains(subcommand) && doc.at(subcommand).is_object()) add_json_entries(doc.at(subcommand), out);
  return out;
}

std::vector<ConfigEntry> parse_toml(const std::string& text, const std::string& subcommand) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw FormatError(std::string("config is not valid TOML: ") + e.what(), 0);
  }
  std::vector<ConfigEntry> out;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == subcommand)) continue;
    out.push_back({item.name, item.inputs});
  }
  return out;
}

}  // namespace

std::vector<ConfigEntry> parse_config(const std::string& text, const std::string& subcommand) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json(text, subcommand);
  return parse_toml(text, subcommand);
}

std::vector<ConfigEntry> load_config(const std::filesystem::path& path, const std::string& subcommand) {
  return parse_config(read_text_file(path), subcommand);
}

void apply_config(CLI::App& app, const std::vector<ConfigEntry>& entries) {
  for (const auto& e : entries) {
    CLI::Option* opt = nullptr;
    try {
      opt = app.get_option("--" + e.key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("unknown config key '" + e.key + "' for " + app.get_name());
    }
    if (opt->count() > 0) continue;  // command line wins
    if (e.values.empty()) throw UsageError("config key '" + e.key + "' has no value");
    try {
      for (const auto& v : e.values) opt->add_result(v);
      opt->run_callback();
    } catch (const CLI::Error& err) {
      throw UsageError("config key '" + e.key + "': " + err.what());
    }
  }
}

}  // namespace lagnet::cli
