#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace chromstraight::testing {

namespace {

double segment_distance(double px, double py, double x0, double y0, double x1, double y1) {
  const double vx = x1 - x0;
  const double vy = y1 - y0;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 > 0.0 ? std::clamp(((px - x0) * vx + (py - y0) * vy) / len2, 0.0, 1.0)
                              : 0.0;
  return std::hypot(px - (x0 + t * vx), py - (y0 + t * vy));
}

} // namespace

GrayImage striped_bar(const BarParams& p) {
  // Odd width puts the center line on a pixel column.
  const int width = 2 * static_cast<int>(std::ceil(p.half_width)) + 1 + 2 * p.margin;
  const int height = p.length + static_cast<int>(std::ceil(2.0 * p.half_width)) + 2 * p.margin;
  const double cx = (width - 1) / 2.0;
  const double y0 = p.margin + p.half_width;
  const double y1 = y0 + p.length;
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, p.noise_stddev > 0.0 ? p.noise_stddev : 1.0);
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const bool dark_band = ((y - p.margin) / (p.stripe_period / 2)) % 2 == 0;
    const double fg = dark_band ? p.dark : p.light;
    for (int x = 0; x < width; ++x) {
      const double dist = segment_distance(x, y, cx, y0, cx, y1);
      const double coverage = std::clamp(p.half_width + 0.5 - dist, 0.0, 1.0);
      double v = p.background + (fg - p.background) * coverage;
      if (p.noise_stddev > 0.0) {
        v += noise(rng);
      }
      out(x, y) = clamp_to_u8(v);
    }
  }
  return out;
}

BarParams random_bar_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BarParams p;
  p.length = std::uniform_int_distribution<int>(60, 100)(rng);
  p.half_width = std::uniform_int_distribution<int>(4, 5)(rng) + 0.5;
  p.stripe_period = 2 * std::uniform_int_distribution<int>(3, 6)(rng);
  p.dark = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(30, 70)(rng));
  p.light = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(90, 125)(rng));
  p.seed = rng();
  return p;
}

GrayImage capsule(int width, int height, double x0, double y0, double x1, double y1,
                  double half_width, std::uint8_t fg, std::uint8_t bg) {
  GrayImage out(width, height, bg);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (segment_distance(x, y, x0, y0, x1, y1) <= half_width) {
        out(x, y) = fg;
      }
    }
  }
  return out;
}

} // namespace chromstraight::testing
