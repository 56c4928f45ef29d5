#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skintone/color.hpp"
#include "skintone/error.hpp"

namespace skintone {

/// Row-major pixel grid.
template <typename Pixel>
class Image {
 public:
  using pixel_type = Pixel;

  Image() = default;

  Image(int width, int height, Pixel fill = Pixel{})
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
    }
    pixels_.assign(std::size_t(width) * std::size_t(height), fill);
  }

  Image(int width, int height, std::vector<Pixel> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0 ||
        pixels_.size() != std::size_t(width) * std::size_t(height)) {
      throw Error(ErrorCode::invalid_argument, "pixel count does not match dimensions");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  Pixel& at(int x, int y) { return pixels_[std::size_t(y) * width_ + x]; }
  const Pixel& at(int x, int y) const { return pixels_[std::size_t(y) * width_ + x]; }

  Pixel& operator[](std::size_t i) { return pixels_[i]; }
  const Pixel& operator[](std::size_t i) const { return pixels_[i]; }

  std::span<Pixel> pixels() noexcept { return pixels_; }
  std::span<const Pixel> pixels() const noexcept { return pixels_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_{0};
  int height_{0};
  std::vector<Pixel> pixels_;
};

using ImageBuffer = Image<Rgb8>;
using RgbImage = Image<Rgb>;
using LabImage = Image<Lab>;

template <typename Out, typename In, typename Fn>
Image<Out> map_pixels(const Image<In>& img, Fn&& fn) {
  std::vector<Out> out;
  out.reserve(img.size());
  for (const auto& p : img.pixels()) out.push_back(fn(p));
  return Image<Out>(img.width(), img.height(), std::move(out));
}

template <typename In>
LabImage to_lab(const Image<In>& img) {
  return map_pixels<Lab>(img, [](const In& p) { return srgb_to_lab(p); });
}

inline RgbImage to_rgb(const LabImage& img) {
  return map_pixels<Rgb>(img, [](const Lab& p) { return lab_to_rgb(p); });
}

inline RgbImage to_rgb(const ImageBuffer& img) {
  return map_pixels<Rgb>(img, [](const Rgb8& p) {
    return Rgb{double(p.r), double(p.g), double(p.b)};
  });
}

inline ImageBuffer to_rgb8(const RgbImage& img) {
  return map_pixels<Rgb8>(img, [](const Rgb& p) { return quantize(p); });
}

inline ImageBuffer to_rgb8(const LabImage& img) {
  return map_pixels<Rgb8>(img, [](const Lab& p) { return lab_to_srgb(p); });
}

}  // namespace skintone
