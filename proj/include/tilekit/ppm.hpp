// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tilekit/errors.hpp"
#include "tilekit/geometry.hpp"

namespace tilekit {

/// 8-bit RGB raster. Chosen as the crop interchange format because binary
/// PPM (P6) is specifiable to the byte.
struct PpmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< RGB, row-major

  std::uint8_t channel(int x, int y, int c) const {
    return pixels[3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(x)) + static_cast<std::size_t>(c)];
  }
};

namespace detail {

inline int read_ppm_int(std::istream& is, const std::string& path) {
  // Token separated by whitespace; '#' starts a comment to end of line.
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw validation_error(path + ": malformed PPM header");
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = is.get();
  }
  return v;
}

}  // namespace detail

inline PpmImage read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path.string());
  char magic[2];
  f.read(magic, 2);
  if (!f || magic[0] != 'P' || magic[1] != '6')
    throw validation_error(path.string() + ": not a binary PPM (P6) file");
  const int w = detail::read_ppm_int(f, path.string());
  const int h = detail::read_ppm_int(f, path.string());
  const int maxval = detail::read_ppm_int(f, path.string());
  if (w < 1 || h < 1) throw validation_error(path.string() + ": invalid PPM dimensions");
  if (maxval != 255) throw validation_error(path.string() + ": only maxval 255 is supported");
  // read_ppm_int consumed exactly one whitespace terminator via its last get().
  PpmImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  f.read(reinterpret_cast<char*>(img.pixels.data()),
         static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw validation_error(path.string() + ": truncated PPM pixel data");
  return img;
}

inline void write_ppm(const std::filesystem::path& path, const PpmImage& img) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != 3 * static_cast<std::size_t>(img.width) *
                               static_cast<std::size_t>(img.height))
    throw validation_error("write_ppm: inconsistent image buffer");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path.string());
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw io_error("failed writing " + path.string());
}

/**
 * @brief Crop @p rect from the image and resample to out_size x out_size
 *        with bilinear interpolation.
 *
 * Pixel centers sit at half-integer coordinates; samples clamp at the image
 * border and round half-up to 8 bits. Cropping a whole W x W image to
 * out_size W is an exact copy.
 */
inline PpmImage crop_resample(const PpmImage& src, const BBox& rect, int out_size) {
  if (out_size < 1) throw validation_error("crop_resample: out_size must be >= 1");
  if (rect.width() <= 0.0 || rect.height() <= 0.0)
    throw validation_error("crop_resample: empty crop rectangle");
  PpmImage dst;
  dst.width = out_size;
  dst.height = out_size;
  dst.pixels.resize(3 * static_cast<std::size_t>(out_size) * static_cast<std::size_t>(out_size));

  const double sx_scale = rect.width() / out_size;
  const double sy_scale = rect.height() / out_size;
  for (int oy = 0; oy < out_size; ++oy) {
    const double sy = rect.y_min + (oy + 0.5) * sy_scale - 0.5;
    const double syc = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(std::floor(syc));
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fy = syc - y0;
    for (int ox = 0; ox < out_size; ++ox) {
      const double sx = rect.x_min + (ox + 0.5) * sx_scale - 0.5;
      const double sxc = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(std::floor(sxc));
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double fx = sxc - x0;
      for (int c = 0; c < 3; ++c) {
        const double v00 = src.channel(x0, y0, c);
        const double v10 = src.channel(x1, y0, c);
        const double v01 = src.channel(x0, y1, c);
        const double v11 = src.channel(x1, y1, c);
        const double top = v00 + (v10 - v00) * fx;
        const double bot = v01 + (v11 - v01) * fx;
        const double v = top + (bot - top) * fy;
        dst.pixels[3 * (static_cast<std::size_t>(oy) * static_cast<std::size_t>(out_size) +
                        static_cast<std::size_t>(ox)) + static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return dst;
}

}  // namespace tilekit
