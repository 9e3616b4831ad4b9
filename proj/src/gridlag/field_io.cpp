#include "lagnet/gridlag/field_io.hpp"

#include <sstream>

#include <json.hpp>

#include "lagnet/textio.hpp"

namespace lagnet::gridlag {

void write_field_snapshot(const std::filesystem::path& csv, const GridField& field) {
  field.validate();
  std::string out = "site,phi,phi_dot\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    out += std::to_string(i) + ',' + format_double(field.phi[i]) + ',' + format_double(field.phi_dot[i]) + '\n';
  }
  const std::string meta = "{\n  \"n\": " + std::to_string(field.size()) + ",\n  \"dx\": " + format_double(field.dx) +
                           ",\n  \"boundary\": \"periodic\"\n}\n";
  write_text_file(csv, out);
  write_text_file(sidecar_path(csv), meta);
}

GridField read_field_snapshot(const std::filesystem::path& csv) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(sidecar_path(csv)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field metadata is not valid JSON: ") + e.what(), 0);
  }
  GridField field;
  std::size_t n = 0;
  try {
    n = meta.at("n").get<std::size_t>();
    field.dx = meta.at("dx").get<double>();
    if (meta.at("boundary").get<std::string>() != "periodic") throw FormatError("only periodic boundaries are supported", 0);
  } catch (const nlohmann::json::exception&) {
    throw FormatError("field metadata needs n, dx and boundary", 0);
  }

  std::istringstream in(read_text_file(csv));
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"site", "phi", "phi_dot"}) {
    throw FormatError("expected header 'site,phi,phi_dot'", 1);
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw FormatError("expected 3 columns, found " + std::to_string(cells.size()), lineno);
    try {
      if (parse_double(cells[0]) != static_cast<double>(field.phi.size())) {
        throw FormatError("sites must be listed in order starting at 0", lineno);
      }
      field.phi.push_back(parse_double(cells[1]));
      field.phi_dot.push_back(parse_double(cells[2]));
    } catch (const FormatError&) {
      throw;
    } catch (const UsageError& e) {
      throw FormatError(e.what(), lineno);
    }
  }
  if (field.size() != n) {
    throw FormatError("metadata says n = " + std::to_string(n) + " but the file has " + std::to_string(field.size()) +
                          " rows",
                      lineno);
  }
  field.validate();
  return field;
}

}  // namespace lagnet::gridlag
