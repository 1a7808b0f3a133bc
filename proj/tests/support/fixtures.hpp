#pragma once

#include "chromstraight/image.hpp"

#include <cstdint>

namespace chromstraight::testing {

struct BarParams {
  int length = 80;           // end-to-end length of the capsule core
  double half_width = 5.5;
  int stripe_period = 8;
  std::uint8_t dark = 50;
  std::uint8_t light = 120;
  std::uint8_t background = 225;
  int margin = 8;
  double noise_stddev = 2.0;
  std::uint64_t seed = 0;
};

/// Vertical capsule with anti-aliased edges and horizontal bands, on a
/// light background with mild Gaussian texture.
GrayImage striped_bar(const BarParams& params);

/// Randomized bar parameters for fixture suites.
BarParams random_bar_params(std::uint64_t seed);

/// Solid dark capsule (no bands, no noise) between two arbitrary points.
GrayImage capsule(int width, int height, double x0, double y0, double x1, double y1,
                  double half_width, std::uint8_t fg = 30, std::uint8_t bg = 220);

} // namespace chromstraight::testing
