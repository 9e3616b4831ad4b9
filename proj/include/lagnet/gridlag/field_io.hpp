#pragma once

#include <filesystem>

#include "lagnet/gridlag/grid.hpp"

namespace lagnet::gridlag {

/// CSV `site,phi,phi_dot` plus a JSON sidecar {n, dx, boundary}.
void write_field_snapshot(const std::filesystem::path& csv, const GridField& field);

/// Throws IoError when a file is missing, FormatError (with the line) when malformed.
GridField read_field_snapshot(const std::filesystem::path& csv);

}  // namespace lagnet::gridlag
