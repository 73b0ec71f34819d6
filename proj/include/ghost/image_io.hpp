#pragma once

// Mask files: 8-bit grayscale PNG (0 = background, 255 = trajectory) for
// generated labels; 8/16-bit grayscale PNG or little-endian PFM for
// probability masks under evaluation.

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ghost/error.hpp"
#include "ghost/grid.hpp"

namespace ghost {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error("cannot open " + path.string());
  return f;
}

}  // namespace detail

// Values are clamped to [0, 1] and quantized to round(255 v).
inline void write_png(const std::filesystem::path& path,
                      const TrajectoryMask& mask) {
  if (mask.empty()) throw Error("write_png: empty mask");
  std::vector<png_byte> row(static_cast<std::size_t>(mask.width()));
  auto file = detail::open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng error writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(mask.width()),
               static_cast<png_uint_32>(mask.height()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const float v = std::clamp(mask(x, y), 0.0f, 1.0f);
      row[static_cast<std::size_t>(x)] =
          static_cast<png_byte>(std::lround(v * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Grayscale PNG of depth 1-16; color input is reduced to its luminance.
// Returns values v / (2^depth - 1).
inline TrajectoryMask read_png(const std::filesystem::path& path) {
  auto file = detail::open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(path.string() + " is not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_create_info_struct failed");
  }
  TrajectoryMask mask;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng error reading " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);
  png_read_update_info(png, info);
  const auto width = static_cast<int>(png_get_image_width(png, info));
  const auto height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  row.resize(png_get_rowbytes(png, info));
  mask = TrajectoryMask(width, height);
  const float max_level = depth == 16 ? 65535.0f : 255.0f;
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      float v;
      if (depth == 16) {
        std::uint16_t s;
        std::memcpy(&s, row.data() + 2 * x, 2);
        v = static_cast<float>(s) / max_level;
      } else {
        v = static_cast<float>(row[static_cast<std::size_t>(x)]) / max_level;
      }
      mask(x, y) = v;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return mask;
}

// Single-channel PFM ("Pf"), little-endian, rows stored bottom-to-top.
inline void write_pfm(const std::filesystem::path& path,
                      const TrajectoryMask& mask) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "Pf\n" << mask.width() << ' ' << mask.height() << "\n-1.0\n";
  for (int y = mask.height() - 1; y >= 0; --y) {
    for (int x = 0; x < mask.width(); ++x) {
      const float v = mask(x, y);
      unsigned char raw[4];
      std::memcpy(raw, &v, 4);
      if constexpr (std::endian::native == std::endian::big) {
        std::reverse(raw, raw + 4);
      }
      out.write(reinterpret_cast<const char*>(raw), 4);
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

inline TrajectoryMask read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || magic != "Pf" || width <= 0 || height <= 0 || scale == 0.0) {
    throw Error(path.string() + ": not a single-channel PFM file");
  }
  in.get();  // single whitespace before the raster
  const bool little = scale < 0.0;
  TrajectoryMask mask(width, height);
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      unsigned char raw[4];
      if (!in.read(reinterpret_cast<char*>(raw), 4)) {
        throw Error(path.string() + ": truncated PFM raster");
      }
      const bool swap = little != (std::endian::native == std::endian::little);
      if (swap) std::reverse(raw, raw + 4);
      float v;
      std::memcpy(&v, raw, 4);
      mask(x, y) = v;
    }
  }
  return mask;
}

inline TrajectoryMask read_mask(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".png") return read_png(path);
  throw Error("unsupported mask format: " + path.string());
}

inline void write_mask(const std::filesystem::path& path,
                       const TrajectoryMask& mask) {
  if (path.extension() == ".pfm") {
    write_pfm(path, mask);
  } else {
    write_png(path, mask);
  }
}

}  // namespace ghost
