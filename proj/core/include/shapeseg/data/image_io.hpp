#pragma once

#include "shapeseg/data/image.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace shapeseg::data {

/// Integer raster as stored on disk.
struct RawImage {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<std::uint16_t> values;  // row-major
};

/// Binary PGM (P5), 8-bit or 16-bit big-endian depending on maxval.
RawImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const RawImage& image);

/// Grayscale PNG, 8 or 16 bits per sample (color input is converted).
RawImage read_png(const std::filesystem::path& path);

/// 8-bit RGB PNG; rgb holds width*height*3 bytes.
void write_png_rgb(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);

/// Reads a PGM or PNG (by signature) and divides raw values by 2^bit_depth.
/// Raw values at or above 2^bit_depth are rejected.
GrayImage load_and_normalize(const std::filesystem::path& path, int bit_depth);

/// Normalizes an in-memory raster the same way.
GrayImage normalize_raw(const RawImage& raw, int bit_depth);

/// Inverse of normalize_raw: round(v * 2^bit_depth), clamped to the range.
RawImage quantize(const GrayImage& image, int bit_depth);

}  // namespace shapeseg::data
