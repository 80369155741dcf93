#include "homog/voxel_io.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "homog/common.hpp"

namespace homog {

namespace fs = std::filesystem;
using nlohmann::json;

VoxelImage load_voxel(const std::string& header_path) {
  std::ifstream in(header_path);
  if (!in) throw std::runtime_error("load_voxel: cannot open header " + header_path);
  json header = json::parse(in);

  if (header.at("dtype").get<std::string>() != "u8")
    throw std::runtime_error("load_voxel: unsupported dtype in " + header_path);
  if (header.at("byte_order").get<std::string>() != "little-endian")
    throw std::runtime_error("load_voxel: unsupported byte order in " + header_path);

  std::vector<int> dims = header.at("dims").get<std::vector<int>>();
  GridShape resolution{std::span<const int>(dims.data(), dims.size())};

  std::array<double, 256> conductivity{};
  std::array<bool, 256> known{};
  for (const auto& [key, value] : header.at("phases").items()) {
    const int id = std::stoi(key);
    if (id < 0 || id > 255) throw std::runtime_error("load_voxel: phase id out of range");
    conductivity[id] = value.get<double>();
    known[id] = true;
  }

  const fs::path payload = fs::path(header_path).parent_path() / header.at("payload").get<std::string>();
  std::ifstream raw(payload, std::ios::binary);
  if (!raw) throw std::runtime_error("load_voxel: cannot open payload " + payload.string());
  const long count = resolution.cell_count();
  std::vector<std::uint8_t> ids(count);
  raw.read(reinterpret_cast<char*>(ids.data()), count);
  if (raw.gcount() != count) throw std::runtime_error("load_voxel: payload truncated");

  VoxelImage img;
  img.resolution = resolution;
  img.values.resize(count);
  for (long i = 0; i < count; ++i) {
    if (!known[ids[i]]) throw std::runtime_error("load_voxel: phase id missing from header map");
    img.values[i] = conductivity[ids[i]];
  }
  return img;
}

void save_voxel(const std::string& header_path, const std::string& payload_name,
                const GridShape& resolution, const std::uint8_t* phase_ids,
                const std::vector<std::pair<std::uint8_t, double>>& phase_conductivity) {
  json phases = json::object();
  for (const auto& [id, c] : phase_conductivity) phases[std::to_string(id)] = c;
  std::vector<int> dims(resolution.dims().begin(), resolution.dims().end());
  json header = {
      {"dims", dims},
      {"dtype", "u8"},
      {"byte_order", "little-endian"},
      {"payload", payload_name},
      {"phases", phases},
  };
  std::ofstream out(header_path);
  if (!out) throw std::runtime_error("save_voxel: cannot write header " + header_path);
  out << header.dump(2) << "\n";

  const fs::path payload = fs::path(header_path).parent_path() / payload_name;
  std::ofstream raw(payload, std::ios::binary);
  if (!raw) throw std::runtime_error("save_voxel: cannot write payload " + payload.string());
  raw.write(reinterpret_cast<const char*>(phase_ids), resolution.cell_count());
}

namespace {

std::vector<std::uint8_t> synthetic_phase_ids(int d, int resolution, std::uint64_t seed) {
  if (resolution % 2 == 0)
    throw std::invalid_argument("synthetic_voxel: resolution must be odd");
  std::array<int, 3> dims{1, 1, 1};
  for (int a = 0; a < d; ++a) dims[a] = resolution;
  GridShape shape{std::span<const int>(dims.data(), d)};

  // A handful of low-frequency periodic modes, thresholded at zero.
  SplitMix64 rng(seed);
  constexpr int kModes = 6;
  struct Mode {
    std::array<int, 3> k;
    double amp, phase;
  };
  std::vector<Mode> modes(kModes);
  for (auto& m : modes) {
    for (int a = 0; a < 3; ++a) m.k[a] = 0;
    bool nonzero = false;
    while (!nonzero) {
      for (int a = 0; a < d; ++a) {
        m.k[a] = static_cast<int>(rng.below(7)) - 3;
        nonzero |= m.k[a] != 0;
      }
    }
    m.amp = 0.5 + rng.uniform();
    m.phase = 2.0 * std::numbers::pi * rng.uniform();
  }

  std::vector<std::uint8_t> ids(shape.cell_count());
  for_each_cell(shape, [&](std::span<const int> idx, long cell) {
    double g = 0.0;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (int a = 0; a < d; ++a)
        arg += 2.0 * std::numbers::pi * m.k[a] * static_cast<double>(idx[a]) / resolution;
      g += m.amp * std::cos(arg);
    }
    ids[cell] = g > 0.0 ? 1 : 0;
  });
  return ids;
}

}  // namespace

VoxelImage synthetic_voxel(int d, int resolution, std::uint64_t seed, double conductivity0,
                           double conductivity1) {
  const auto ids = synthetic_phase_ids(d, resolution, seed);
  std::array<int, 3> dims{1, 1, 1};
  for (int a = 0; a < d; ++a) dims[a] = resolution;
  VoxelImage img;
  img.resolution = GridShape{std::span<const int>(dims.data(), d)};
  img.values.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    img.values[i] = ids[i] ? conductivity1 : conductivity0;
  return img;
}

std::string write_synthetic_voxel(const std::string& out_dir, int d, int resolution,
                                  std::uint64_t seed, double conductivity0, double conductivity1) {
  fs::create_directories(out_dir);
  const auto ids = synthetic_phase_ids(d, resolution, seed);
  std::array<int, 3> dims{1, 1, 1};
  for (int a = 0; a < d; ++a) dims[a] = resolution;
  GridShape shape{std::span<const int>(dims.data(), d)};
  const std::string header = (fs::path(out_dir) / "voxel.json").string();
  save_voxel(header, "voxel.raw", shape, ids.data(),
             {{0, conductivity0}, {1, conductivity1}});
  return header;
}

}  // namespace homog
