#pragma once

// Image decode/encode. PNG goes through libpng's simplified API; binary PPM
// (P6, maxval 255) is handled inline.

#include <png.h>

#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "skintone/error.hpp"
#include "skintone/image.hpp"

namespace skintone {

namespace detail {

inline std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (auto& c : e) c = char(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

inline ImageBuffer read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorCode::image_decode_error,
                path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw Error(ErrorCode::image_decode_error, path.string() + ": empty image");
  }
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::image_decode_error, path.string() + ": " + msg);
  }
  std::vector<Rgb8> px(std::size_t(img.width) * img.height);
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  }
  return ImageBuffer(int(img.width), int(img.height), std::move(px));
}

inline void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width());
  img.height = png_uint_32(image.height());
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf;
  buf.reserve(image.size() * 3);
  for (const auto& p : image.pixels()) {
    buf.push_back(p.r);
    buf.push_back(p.g);
    buf.push_back(p.b);
  }
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error(ErrorCode::io, path.string() + ": " + img.message);
  }
}

inline ImageBuffer read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::image_decode_error, path.string() + ": cannot open");
  auto token = [&]() {
    std::string t;
    char c = 0;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        t.push_back(c);
        break;
      }
    }
    while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    return t;
  };
  const std::string magic = token();
  if (magic != "P6") {
    throw Error(ErrorCode::image_decode_error, path.string() + ": not a binary PPM");
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::image_decode_error, path.string() + ": bad PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw Error(ErrorCode::image_decode_error, path.string() + ": unsupported PPM");
  }
  std::vector<char> buf(std::size_t(w) * h * 3);
  if (!in.read(buf.data(), std::streamsize(buf.size()))) {
    throw Error(ErrorCode::image_decode_error, path.string() + ": truncated PPM");
  }
  std::vector<Rgb8> px(std::size_t(w) * h);
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = {std::uint8_t(buf[3 * i]), std::uint8_t(buf[3 * i + 1]),
             std::uint8_t(buf[3 * i + 2])};
  }
  return ImageBuffer(w, h, std::move(px));
}

inline void write_ppm(const std::filesystem::path& path, const ImageBuffer& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, path.string() + ": cannot write");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (const auto& p : image.pixels()) {
    const char rgb[3] = {char(p.r), char(p.g), char(p.b)};
    out.write(rgb, 3);
  }
}

}  // namespace detail

/// Decodes a PNG or binary PPM file by extension.
inline ImageBuffer read_image(const std::filesystem::path& path) {
  const auto ext = detail::lower_ext(path);
  if (ext == ".ppm") return detail::read_ppm(path);
  if (ext == ".png") return detail::read_png(path);
  throw Error(ErrorCode::image_decode_error,
              path.string() + ": unsupported image format '" + ext + "'");
}

inline void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
  const auto ext = detail::lower_ext(path);
  if (ext == ".ppm") return detail::write_ppm(path, image);
  if (ext == ".png") return detail::write_png(path, image);
  throw Error(ErrorCode::io, path.string() + ": unsupported image format '" + ext + "'");
}

}  // namespace skintone
