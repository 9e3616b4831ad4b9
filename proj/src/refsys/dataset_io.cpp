#include "lagnet/refsys/dataset_io.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "lagnet/errors.hpp"
#include "lagnet/refsys/integrate.hpp"
#include "lagnet/textio.hpp"

namespace lagnet::refsys {

std::size_t Dataset::samples() const noexcept {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.size();
  return n;
}

Dataset make_dataset(const ReferenceSystem& system, std::size_t count, double h, std::size_t steps,
                     std::uint64_t seed) {
  Dataset data;
  data.trajectories = generate_trajectories(system, count, h, steps, seed);
  data.meta = {system.name(), system.dof(), h,        steps,           count,
               seed,          system.constants(), system.grid(), system.sampler()};
  return data;
}

namespace {

std::string header(std::size_t d) {
  std::string out = "traj,t";
  for (const char* prefix : {"q", "qd", "a"}) {
    for (std::size_t i = 0; i < d; ++i) out += "," + std::string(prefix) + std::to_string(i);
  }
  return out;
}

}  // namespace

std::string dataset_csv(const Dataset& data) {
  const std::size_t d = data.meta.d;
  std::string out = header(d) + "\n";
  for (std::size_t k = 0; k < data.trajectories.size(); ++k) {
    const auto& t = data.trajectories[k];
    if (!t.states.empty() && t.states.front().dof() != d) throw UsageError("trajectory dimension differs from metadata");
    for (std::size_t s = 0; s < t.size(); ++s) {
      out += std::to_string(k) + "," + format_double(t.times[s]);
      for (double v : t.states[s].q) out += "," + format_double(v);
      for (double v : t.states[s].q_dot) out += "," + format_double(v);
      for (double v : t.accels[s]) out += "," + format_double(v);
      out += "\n";
    }
  }
  return out;
}

std::string dataset_meta_json(const DatasetMeta& meta) {
  nlohmann::ordered_json j;
  j["system"] = meta.system;
  j["d"] = meta.d;
  j["h"] = meta.h;
  j["steps"] = meta.steps;
  j["count"] = meta.count;
  j["seed"] = meta.seed;
  j["constants"] = {{"m", meta.constants.m}, {"l", meta.constants.l}, {"g", meta.constants.g}, {"k", meta.constants.k}};
  if (meta.system == "wave1d") j["grid"] = {{"sites", meta.grid.sites}, {"dx", meta.grid.dx}};
  auto ranges = nlohmann::ordered_json::array();
  for (const auto& r : meta.sampler) ranges.push_back({{"quantity", r.quantity}, {"lo", r.lo}, {"hi", r.hi}});
  j["sampler"] = std::move(ranges);
  return j.dump(2) + "\n";
}

void write_dataset(const std::filesystem::path& csv, const Dataset& data) {
  write_text_file(csv, dataset_csv(data));
  write_text_file(sidecar_path(csv), dataset_meta_json(data.meta));
}

namespace {

DatasetMeta parse_meta(const std::string& text) {
  DatasetMeta m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.system = j.at("system").get<std::string>();
    m.d = j.at("d").get<std::size_t>();
    m.h = j.at("h").get<double>();
    m.steps = j.at("steps").get<std::size_t>();
    m.count = j.at("count").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("constants")) {
      const auto& c = j.at("constants");
      m.constants = {c.at("m").get<double>(), c.at("l").get<double>(), c.at("g").get<double>(),
                     c.at("k").get<double>()};
    }
    if (j.contains("grid")) m.grid = {j.at("grid").at("sites").get<std::size_t>(), j.at("grid").at("dx").get<double>()};
    if (j.contains("sampler")) {
      for (const auto& r : j.at("sampler")) {
        m.sampler.push_back({r.at("quantity").get<std::string>(), r.at("lo").get<double>(), r.at("hi").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset metadata is malformed: ") + e.what(), 0);
  }
  return m;
}

}  // namespace

Dataset parse_dataset(const std::string& csv_text, const DatasetMeta* meta) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset is empty", 1);
  const auto cols = split_csv_line(line);
  if (cols.size() < 5 || (cols.size() - 2) % 3 != 0) throw FormatError("unexpected dataset header", 1);
  const std::size_t d = (cols.size() - 2) / 3;
  if (split_csv_line(line) != split_csv_line(header(d))) {
    throw FormatError("expected header '" + header(d) + "'", 1);
  }
  if (meta && meta->d != d) {
    throw FormatError("metadata says d = " + std::to_string(meta->d) + " but the header has " + std::to_string(d), 1);
  }

  Dataset data;
  if (meta) data.meta = *meta;
  data.meta.d = d;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols.size()) {
      throw FormatError("expected " + std::to_string(cols.size()) + " columns, found " + std::to_string(cells.size()),
                        lineno);
    }
    std::vector<double> v(cells.size());
    try {
      for (std::size_t c = 0; c < cells.size(); ++c) v[c] = parse_double(cells[c]);
    } catch (const UsageError& e) {
      throw FormatError(e.what(), lineno);
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw FormatError("non-finite value", lineno);
    }
    const double id = v[0];
    if (id != std::floor(id) || id < 0) throw FormatError("trajectory id must be a non-negative integer", lineno);
    const auto traj = static_cast<std::size_t>(id);
    if (traj == data.trajectories.size()) {
      data.trajectories.emplace_back();
      data.trajectories.back().system = data.meta.system;
    } else if (traj + 1 != data.trajectories.size()) {
      throw FormatError("trajectory ids must be contiguous and ascending", lineno);
    }
    auto& t = data.trajectories.back();
    t.times.push_back(v[1]);
    eldyn::PhaseState s;
    s.q.assign(v.begin() + 2, v.begin() + 2 + static_cast<std::ptrdiff_t>(d));
    s.q_dot.assign(v.begin() + 2 + static_cast<std::ptrdiff_t>(d), v.begin() + 2 + static_cast<std::ptrdiff_t>(2 * d));
    t.states.push_back(std::move(s));
    t.accels.emplace_back(v.begin() + 2 + static_cast<std::ptrdiff_t>(2 * d), v.end());
  }

  if (!meta) {
    data.meta.system = "unknown";
    data.meta.count = data.trajectories.size();
    if (!data.trajectories.empty() && data.trajectories.front().size() >= 2) {
      data.meta.h = data.trajectories.front().times[1] - data.trajectories.front().times[0];
      data.meta.steps = data.trajectories.front().size() - 1;
    }
  }
  for (std::size_t k = 0; k < data.trajectories.size(); ++k) {
    auto& t = data.trajectories[k];
    t.h = data.meta.h;
    if (meta) t.seed = mix64(meta->seed ^ static_cast<std::uint64_t>(k));
    try {
      if (t.size() >= 2) t.validate();
    } catch (const UsageError& e) {
      throw FormatError("trajectory " + std::to_string(k) + ": " + e.what(), 0);
    }
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& csv) {
  const std::string text = read_text_file(csv);
  const auto side = sidecar_path(csv);
  if (std::filesystem::exists(side)) {
    const DatasetMeta meta = parse_meta(read_text_file(side));
    return parse_dataset(text, &meta);
  }
  return parse_dataset(text, nullptr);
}

}  // namespace lagnet::refsys
