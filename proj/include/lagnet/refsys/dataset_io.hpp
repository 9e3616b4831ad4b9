#pragma once

// Dataset files: CSV `traj,t,q0..q{d-1},qd0..qd{d-1},a0..a{d-1}` with doubles
// at 17 significant digits, plus a JSON sidecar (see textio.hpp for the name)
// holding {system, d, h, steps, count, seed, sampler, constants, grid}.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lagnet/eldyn/types.hpp"
#include "lagnet/refsys/systems.hpp"

namespace lagnet::refsys {

struct DatasetMeta {
  std::string system;
  std::size_t d = 0;
  double h = 0.0;
  std::size_t steps = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  Constants constants;
  WaveGrid grid;
  std::vector<SamplerRange> sampler;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<eldyn::Trajectory> trajectories;

  std::size_t samples() const noexcept;
};

/// Generates trajectories and fills in the matching metadata.
Dataset make_dataset(const ReferenceSystem& system, std::size_t count, double h, std::size_t steps,
                     std::uint64_t seed);

std::string dataset_csv(const Dataset& data);
std::string dataset_meta_json(const DatasetMeta& meta);

void write_dataset(const std::filesystem::path& csv, const Dataset& data);

/// Reads the CSV and its sidecar. Without a sidecar, d comes from the header
/// and h from the first two time stamps. Malformed rows raise FormatError
/// carrying the 1-based line number.
Dataset read_dataset(const std::filesystem::path& csv);
Dataset parse_dataset(const std::string& csv_text, const DatasetMeta* meta);

}  // namespace lagnet::refsys
