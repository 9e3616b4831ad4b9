#include "lagnet/netcore/checkpoint.hpp"

#include <cmath>

#include <json.hpp>

#include "lagnet/errors.hpp"
#include "lagnet/textio.hpp"

namespace lagnet::netcore {

namespace {

void append_array(std::string& out, std::span<const double> values, const char* what) {
  out += '[';
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw NumericError(std::string("cannot store non-finite ") + what + " at index " + std::to_string(k));
    }
    if (k) out += ',';
    out += format_double(values[k]);
  }
  out += ']';
}

template <class T>
T field(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) throw FormatError(std::string("checkpoint is missing '") + key + "'", 0);
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("checkpoint field '") + key + "' has the wrong type", 0);
  }
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  c.config.validate();
  if (c.parameters.size() != c.config.parameter_count()) {
    throw UsageError("checkpoint parameters do not match the network configuration");
  }
  std::string out = "{\n";
  out += "  \"format_version\": " + std::to_string(kCheckpointFormatVersion) + ",\n";
  out += "  \"config\": {\"input_dim\": " + std::to_string(c.config.input_dim) + ", \"hidden_layers\": [";
  for (std::size_t k = 0; k < c.config.hidden_layers.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(c.config.hidden_layers[k]);
  }
  out += "], \"activation\": \"" + std::string(to_string(c.config.activation)) + "\"},\n";
  out += "  \"seed\": " + std::to_string(c.config.seed) + ",\n";
  if (!c.transform.empty()) {
    out += "  \"input_transform\": {\"mean\": ";
    append_array(out, c.transform.mean, "transform mean");
    out += ", \"scale\": ";
    append_array(out, c.transform.scale, "transform scale");
    out += "},\n";
  }
  out += "  \"flat_parameters\": ";
  append_array(out, c.parameters.flat(), "parameter");
  out += "\n}\n";
  return out;
}

Checkpoint checkpoint_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what(), 0);
  }
  if (!doc.is_object()) throw FormatError("checkpoint must be a JSON object", 0);
  const int version = field<int>(doc, "format_version");
  if (version != kCheckpointFormatVersion) {
    throw FormatError("unsupported checkpoint format_version " + std::to_string(version), 0);
  }
  const auto& cfg = doc.at("config");
  if (!cfg.is_object()) throw FormatError("checkpoint 'config' must be an object", 0);

  Checkpoint c;
  c.config.input_dim = field<std::size_t>(cfg, "input_dim");
  c.config.hidden_layers = field<std::vector<std::size_t>>(cfg, "hidden_layers");
  c.config.activation = parse_activation(field<std::string>(cfg, "activation"));
  c.config.seed = field<std::uint64_t>(doc, "seed");
  c.config.validate();
  if (doc.contains("input_transform")) {
    const auto& t = doc.at("input_transform");
    c.transform.mean = field<std::vector<double>>(t, "mean");
    c.transform.scale = field<std::vector<double>>(t, "scale");
  }
  c.parameters = ParameterSet(c.config, field<std::vector<double>>(doc, "flat_parameters"));
  Network check(c.config, c.transform);  // validates the transform
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace lagnet::netcore
