#pragma once

#include <cstdint>
#include <string>

#include "homog/material.hpp"

namespace homog {

/**
 * Voxel images travel as two files: a JSON header and a raw binary payload.
 *
 * Header fields:
 *   dims        list of d positive integers
 *   dtype       "u8" (one phase id per voxel)
 *   byte_order  "little-endian"
 *   payload     file name of the raw payload, relative to the header
 *   phases      map from phase id (as a string) to conductivity
 *
 * The payload stores one u8 phase id per voxel in x-fastest order.
 */
VoxelImage load_voxel(const std::string& header_path);

void save_voxel(const std::string& header_path, const std::string& payload_name,
                const GridShape& resolution, const std::uint8_t* phase_ids,
                const std::vector<std::pair<std::uint8_t, double>>& phase_conductivity);

// Deterministic two-phase periodic microstructure: a few low-frequency
// cosine modes drawn from the seed, thresholded at zero.
VoxelImage synthetic_voxel(int d, int resolution, std::uint64_t seed, double conductivity0,
                           double conductivity1);

// Writes the synthetic image through the header/payload format and returns
// the header path (exercises the same ingestion path as external data).
std::string write_synthetic_voxel(const std::string& out_dir, int d, int resolution,
                                  std::uint64_t seed, double conductivity0, double conductivity1);

}  // namespace homog
