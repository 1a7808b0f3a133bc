#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chromstraight {

/// Raised for every recoverable failure in the toolkit. The message is meant
/// to be shown to a user and recorded in per-sample error reports.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

/// Row-major 8-bit single-channel raster.
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::uint8_t operator()(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& operator()(int x, int y) { return data_[index(x, y)]; }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Histogram {
  std::array<std::uint64_t, 256> bins{};

  std::uint64_t total() const;
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Reads a PNG as 8-bit grayscale. Color inputs are converted with the
/// Rec. 601 luma weights; alpha is discarded.
GrayImage load_png(const std::filesystem::path& path);
void save_png(const GrayImage& image, const std::filesystem::path& path);

/// Luma of an 8-bit RGB triple, rounded to nearest.
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

Histogram histogram(const GrayImage& image);

/// 1-D median filter over histogram bins with a clamped window at the ends.
Histogram smooth_histogram(const Histogram& hist, int window = 3);

/// Bilinear sample at a sub-pixel location; samples outside the raster
/// return `outside`.
double sample_bilinear(const GrayImage& image, double x, double y,
                       double outside);

/// Resizes with bilinear interpolation (pixel-center aligned).
GrayImage resize_bilinear(const GrayImage& image, int width, int height);

std::uint8_t clamp_to_u8(double value);

} // namespace chromstraight
