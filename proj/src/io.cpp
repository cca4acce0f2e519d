#include "amc/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "amc/errors.hpp"

namespace amc {

static_assert(std::endian::native == std::endian::little,
              "remap I/O assumes a little-endian host");

Frame read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError("cannot read " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode " + path.string() + ": " + image.message);
  }
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height), color ? 3 : 1);
  auto data = frame.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = buffer[i] / 255.0f;
  return frame;
}

void write_png(const std::filesystem::path& path, const Frame& frame) {
  if (frame.channels() != 1 && frame.channels() != 3) {
    throw DataError("write_png supports 1 or 3 channels");
  }
  std::vector<png_byte> buffer(frame.data().size());
  const auto data = frame.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = std::clamp(data[i], 0.0f, 1.0f);
    buffer[i] = static_cast<png_byte>(std::floor(v * 255.0f + 0.5f));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = frame.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    throw DataError("cannot write " + path.string() + ": " + image.message);
  }
}

namespace {

constexpr std::array<char, 8> kRemapMagic = {'A', 'M', 'C', 'R', 'E', 'M', 'A', 'P'};

}  // namespace

RemapTable read_remap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open remap file " + path.string());
  std::array<char, 8> magic{};
  std::uint32_t h = 0;
  std::uint32_t w = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  in.read(reinterpret_cast<char*>(&w), sizeof(w));
  if (!in || magic != kRemapMagic) throw DataError("not a remap file: " + path.string());
  RemapTable table;
  table.width = static_cast<int>(w);
  table.height = static_cast<int>(h);
  table.xy.resize(static_cast<std::size_t>(w) * h * 2);
  in.read(reinterpret_cast<char*>(table.xy.data()),
          static_cast<std::streamsize>(table.xy.size() * sizeof(float)));
  if (!in) throw DataError("truncated remap file: " + path.string());
  return table;
}

void write_remap(const std::filesystem::path& path, const RemapTable& table) {
  if (table.xy.size() != static_cast<std::size_t>(table.width) * table.height * 2) {
    throw DataError("remap table size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot create " + path.string());
  const auto h = static_cast<std::uint32_t>(table.height);
  const auto w = static_cast<std::uint32_t>(table.width);
  out.write(kRemapMagic.data(), kRemapMagic.size());
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  out.write(reinterpret_cast<const char*>(&w), sizeof(w));
  out.write(reinterpret_cast<const char*>(table.xy.data()),
            static_cast<std::streamsize>(table.xy.size() * sizeof(float)));
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace amc
