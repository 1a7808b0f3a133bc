#pragma once

#include "chromstraight/image.hpp"

#include <cstdint>
#include <vector>

namespace chromstraight {

/// Row-major foreground mask; `true` marks chromosome pixels.
class BinaryMask {
public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool operator()(int x, int y) const { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool value) { data_[index(x, y)] = value ? 1 : 0; }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  /// Out-of-bounds reads are background.
  bool at(int x, int y) const { return contains(x, y) && (*this)(x, y); }

  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class Polarity {
  DarkForeground,  ///< chromosomes darker than the background (G-banding)
  LightForeground, ///< chromosomes brighter than the background (Q-banding)
};

/// Threshold maximizing the between-class variance. Pixels with value
/// < threshold form the lower class, so the result lies in [1, 255]. Ties
/// resolve to the lowest threshold. Throws if fewer than two bins are
/// populated.
int otsu_threshold(const Histogram& hist);

/// Dark polarity: foreground = value < threshold. Light polarity:
/// foreground = value >= threshold.
BinaryMask binarize(const GrayImage& image, int threshold,
                    Polarity polarity = Polarity::DarkForeground);

/// Background regions not 4-connected to the image border become foreground.
BinaryMask fill_holes(const BinaryMask& mask);

/// Keeps the largest 8-connected foreground component.
BinaryMask largest_component(const BinaryMask& mask);

struct Segmentation {
  BinaryMask mask;
  int threshold = 0;
  double background_mean = 0.0;
};

/// Histogram -> median smoothing -> Otsu -> binarize -> hole filling ->
/// largest component. Throws when no foreground survives.
Segmentation segment(const GrayImage& image,
                     Polarity polarity = Polarity::DarkForeground);

/// Mean intensity over the mask complement; falls back to the image mean if
/// the mask covers everything.
double background_mean(const GrayImage& image, const BinaryMask& mask);

GrayImage mask_to_image(const BinaryMask& mask);
BinaryMask image_to_mask(const GrayImage& image);

} // namespace chromstraight
