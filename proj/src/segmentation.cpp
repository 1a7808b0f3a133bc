#include "chromstraight/segmentation.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>

namespace chromstraight {

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error("mask dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
}

int otsu_threshold(const Histogram& hist) {
  const auto populated =
      std::count_if(hist.bins.begin(), hist.bins.end(),
                    [](std::uint64_t c) { return c > 0; });
  if (populated < 2) {
    throw Error("histogram has fewer than two populated intensities; image is "
                "not segmentable");
  }
  std::int64_t total = 0;
  std::int64_t total_sum = 0;
  for (int v = 0; v < 256; ++v) {
    total += static_cast<std::int64_t>(hist.bins[static_cast<std::size_t>(v)]);
    total_sum += static_cast<std::int64_t>(hist.bins[static_cast<std::size_t>(v)]) * v;
  }

  // sigma_B^2 * N^2 = (N*S0 - n0*S)^2 / (n0 * n1)
  std::int64_t n0 = 0;
  std::int64_t s0 = 0;
  long double best = -1.0L;
  int best_t = 1;
  for (int t = 1; t <= 255; ++t) {
    n0 += static_cast<std::int64_t>(hist.bins[static_cast<std::size_t>(t - 1)]);
    s0 += static_cast<std::int64_t>(hist.bins[static_cast<std::size_t>(t - 1)]) * (t - 1);
    const std::int64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) {
      continue;
    }
    const long double diff =
        static_cast<long double>(total) * s0 - static_cast<long double>(n0) * total_sum;
    const long double score =
        diff * diff / (static_cast<long double>(n0) * static_cast<long double>(n1));
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  return best_t;
}

BinaryMask binarize(const GrayImage& image, int threshold, Polarity polarity) {
  BinaryMask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const int v = image(x, y);
      mask.set(x, y, polarity == Polarity::DarkForeground ? v < threshold
                                                          : v >= threshold);
    }
  }
  return mask;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask outside(w, h);
  std::deque<Point> queue;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside.set(x, y, true);
      queue.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nx = p.x + dx[k];
      const int ny = p.y + dy[k];
      if (mask.contains(nx, ny)) {
        seed(nx, ny);
      }
    }
  }
  BinaryMask filled(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      filled.set(x, y, !outside(x, y));
    }
  }
  return filled;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::size_t> sizes;
  std::vector<Point> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) {
        continue;
      }
      const int id = static_cast<int>(sizes.size());
      std::size_t size = 0;
      stack.push_back({x, y});
      label[static_cast<std::size_t>(y) * w + x] = id;
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        ++size;
        for (int ny = p.y - 1; ny <= p.y + 1; ++ny) {
          for (int nx = p.x - 1; nx <= p.x + 1; ++nx) {
            if (!mask.at(nx, ny)) {
              continue;
            }
            int& l = label[static_cast<std::size_t>(ny) * w + nx];
            if (l < 0) {
              l = id;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      sizes.push_back(size);
    }
  }
  BinaryMask out(w, h);
  if (sizes.empty()) {
    return out;
  }
  const int keep = static_cast<int>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.set(x, y, label[static_cast<std::size_t>(y) * w + x] == keep);
    }
  }
  return out;
}

double background_mean(const GrayImage& image, const BinaryMask& mask) {
  double sum = 0.0;
  double all = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      all += image(x, y);
      if (!mask(x, y)) {
        sum += image(x, y);
        ++n;
      }
    }
  }
  return n > 0 ? sum / static_cast<double>(n)
               : all / static_cast<double>(image.size());
}

Segmentation segment(const GrayImage& image, Polarity polarity) {
  const Histogram raw = histogram(image);
  const Histogram smoothed = smooth_histogram(raw, 3);
  // Renderings with a few exact intensities lose their isolated peaks under
  // the median; threshold the raw counts when smoothing drops most of the mass.
  const bool spiky = 2 * smoothed.total() < raw.total();
  const int threshold = otsu_threshold(spiky ? raw : smoothed);

  BinaryMask mask = largest_component(fill_holes(binarize(image, threshold, polarity)));
  if (mask.count() == 0) {
    throw Error("segmentation produced an empty foreground");
  }
  Segmentation result;
  result.background_mean = background_mean(image, mask);
  result.threshold = threshold;
  result.mask = std::move(mask);
  return result;
}

GrayImage mask_to_image(const BinaryMask& mask) {
  GrayImage out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      out(x, y) = mask(x, y) ? 255 : 0;
    }
  }
  return out;
}

BinaryMask image_to_mask(const GrayImage& image) {
  BinaryMask out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.set(x, y, image(x, y) >= 128);
    }
  }
  return out;
}

} // namespace chromstraight
