#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lagnet {

/// 17 significant digits; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Parses a full decimal or hex-float token; throws UsageError otherwise.
double parse_double(const std::string& token);

/// Throws IoError when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
/// Creates missing parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Metadata file written next to a data file: "runs/data.csv" → "runs/data.meta.json".
std::filesystem::path sidecar_path(const std::filesystem::path& data_file);

/// Splits one CSV line on commas (no quoting; all files here are numeric).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lagnet
