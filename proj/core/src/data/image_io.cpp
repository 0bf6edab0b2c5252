#include "shapeseg/data/image_io.hpp"

#include "shapeseg/common/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace shapeseg::data {
namespace {

void skip_pgm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

int read_pgm_int(std::istream& in, const std::filesystem::path& path) {
  skip_pgm_space(in);
  int v = -1;
  if (!(in >> v) || v < 0) throw DataError("bad PGM header in " + path.string());
  return v;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

RawImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') throw DataError(path.string() + " is not a binary PGM (P5)");
  RawImage img;
  img.width = read_pgm_int(in, path);
  img.height = read_pgm_int(in, path);
  img.maxval = read_pgm_int(in, path);
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535) {
    throw DataError("unsupported PGM header in " + path.string());
  }
  in.get();  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.values.resize(n);
  if (img.maxval < 256) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!in) throw DataError("truncated PGM raster in " + path.string());
    std::copy(buf.begin(), buf.end(), img.values.begin());
  } else {
    std::vector<unsigned char> buf(2 * n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
    if (!in) throw DataError("truncated PGM raster in " + path.string());
    for (std::size_t i = 0; i < n; ++i) img.values[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const RawImage& img) {
  if (img.maxval <= 0 || img.maxval > 65535) throw DataError("PGM maxval must lie in [1, 65535]");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  if (img.maxval < 256) {
    std::vector<unsigned char> buf(img.values.begin(), img.values.end());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    std::vector<unsigned char> buf(2 * img.values.size());
    for (std::size_t i = 0; i < img.values.size(); ++i) {
      buf[2 * i] = static_cast<unsigned char>(img.values[i] >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(img.values[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw DataError("write failed for " + path.string());
}

RawImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialization failed");
  }
  RawImage img;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("cannot decode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.values.resize(n);
  if (depth == 16) {
    img.maxval = 65535;
    for (std::size_t i = 0; i < n; ++i) img.values[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
  } else {
    img.maxval = 255;
    for (std::size_t i = 0; i < n; ++i) img.values[i] = buffer[i];
  }
  return img;
}

void write_png_rgb(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw DataError("RGB buffer size mismatch");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("cannot encode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage normalize_raw(const RawImage& raw, int bit_depth) {
  if (bit_depth < 1 || bit_depth > 16) throw DataError("bit depth must lie in [1, 16]");
  const std::uint32_t limit = 1u << bit_depth;
  GrayImage img = GrayImage::filled(raw.width, raw.height, 0.0);
  img.bit_depth_source = bit_depth;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    if (raw.values[i] >= limit) {
      throw DataError("raw value " + std::to_string(raw.values[i]) + " exceeds the " + std::to_string(bit_depth) +
                      "-bit range");
    }
    img.pixels[i] = static_cast<double>(raw.values[i]) / static_cast<double>(limit);
  }
  return img;
}

GrayImage load_and_normalize(const std::filesystem::path& path, int bit_depth) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open " + path.string());
  unsigned char sig[8] = {0};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  if (sig[0] == 'P' && sig[1] == '5') return normalize_raw(read_pgm(path), bit_depth);
  if (png_sig_cmp(sig, 0, 8) == 0) return normalize_raw(read_png(path), bit_depth);
  throw DataError("unrecognized image format: " + path.string());
}

RawImage quantize(const GrayImage& image, int bit_depth) {
  if (bit_depth < 1 || bit_depth > 16) throw DataError("bit depth must lie in [1, 16]");
  const double scale = static_cast<double>(1u << bit_depth);
  const auto top = static_cast<std::uint16_t>((1u << bit_depth) - 1);
  RawImage raw;
  raw.width = image.width;
  raw.height = image.height;
  raw.maxval = top;
  raw.values.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::round(image.pixels[i] * scale);
    raw.values[i] = static_cast<std::uint16_t>(std::clamp(v, 0.0, static_cast<double>(top)));
  }
  return raw;
}

}  // namespace shapeseg::data
