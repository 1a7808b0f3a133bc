#include "chromstraight/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chromstraight {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error("image dimensions must be positive, got " +
                std::to_string(width) + "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error("image dimensions must be positive, got " +
                std::to_string(width) + "x" + std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error("pixel buffer length does not match image dimensions");
  }
}

std::uint64_t Histogram::total() const {
  return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0});
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Integer Rec. 601 weights (sum 1000) so gray triples map to themselves.
  const unsigned sum = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((sum + 500u) / 1000u);
}

GrayImage load_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("image not found: " + path.string());
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw Error("cannot read PNG " + path.string() + ": " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error("cannot decode PNG " + path.string() + ": " + message);
  }
  const int width = static_cast<int>(png.width);
  const int height = static_cast<int>(png.height);
  if (!color) {
    return GrayImage(width, height, std::move(buffer));
  }
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = luminance(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
  }
  return GrayImage(width, height, std::move(gray));
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  if (image.empty()) {
    throw Error("refusing to write an empty image to " + path.string());
  }
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw Error("output directory does not exist: " + parent.string());
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels().data(), 0,
                               nullptr)) {
    throw Error("cannot write PNG " + path.string() + ": " + png.message);
  }
}

Histogram histogram(const GrayImage& image) {
  Histogram hist;
  for (const std::uint8_t v : image.pixels()) {
    ++hist.bins[v];
  }
  return hist;
}

Histogram smooth_histogram(const Histogram& hist, int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error("histogram median window must be odd and positive, got " +
                std::to_string(window));
  }
  const int half = window / 2;
  Histogram out;
  std::vector<std::uint64_t> values;
  for (int i = 0; i < 256; ++i) {
    values.clear();
    for (int k = i - half; k <= i + half; ++k) {
      values.push_back(hist.bins[static_cast<std::size_t>(std::clamp(k, 0, 255))]);
    }
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    out.bins[static_cast<std::size_t>(i)] = *mid;
  }
  return out;
}

std::uint8_t clamp_to_u8(double value) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
}

double sample_bilinear(const GrayImage& image, double x, double y,
                       double outside) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto at = [&](int px, int py) -> double {
    return image.contains(px, py) ? image(px, py) : outside;
  };
  const double top = (1.0 - ax) * at(x0, y0) + ax * at(x0 + 1, y0);
  const double bottom = (1.0 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1);
  return (1.0 - ay) * top + ay * bottom;
}

GrayImage resize_bilinear(const GrayImage& image, int width, int height) {
  GrayImage out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                    static_cast<double>(image.height() - 1));
    for (int x = 0; x < width; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                      static_cast<double>(image.width() - 1));
      out(x, y) = clamp_to_u8(sample_bilinear(image, src_x, src_y, 0.0));
    }
  }
  return out;
}

} // namespace chromstraight
