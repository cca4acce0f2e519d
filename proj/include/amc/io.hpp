#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amc/image.hpp"

namespace amc {

/// Reads an 8-bit PNG as floats in [0, 1] (value / 255). Gray stays one
/// channel, color (with or without alpha) becomes three. Throws DataError.
Frame read_png(const std::filesystem::path& path);

/// Writes 8-bit PNG, round-half-up: byte = floor(clamp(v, 0, 1) * 255 + 0.5).
void write_png(const std::filesystem::path& path, const Frame& frame);

/// Binary remap file: "AMCREMAP", uint32 H, uint32 W, then H*W float32 (x, y)
/// pairs, all little-endian.
RemapTable read_remap(const std::filesystem::path& path);
void write_remap(const std::filesystem::path& path, const RemapTable& table);

/// Sorted list of *.png files in a directory.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

}  // namespace amc
