#include "chromstraight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chromstraight {

double l_score(std::size_t predicted_len, std::size_t target_len) {
  if (target_len == 0) {
    throw Error("target length must be positive");
  }
  const double l = static_cast<double>(predicted_len);
  const double target = static_cast<double>(target_len);
  return (1.0 - std::abs(l - target) / target) * 100.0;
}

double l_score(const MedialAxis& predicted, std::size_t target_len) {
  return l_score(predicted.size(), target_len);
}

double ma_score(const MedialAxis& axis, int samples) {
  if (samples < 1) {
    throw Error("MA score needs at least one segment");
  }
  if (axis.size() < static_cast<std::size_t>(samples) + 1) {
    throw Error("axis has " + std::to_string(axis.size()) + " points; MA score needs " +
                std::to_string(samples + 1));
  }
  // Work relative to the first point so translation cannot change rounding.
  MedialAxis local = axis;
  for (Point& p : local.points) {
    p.x -= axis.points.front().x;
    p.y -= axis.points.front().y;
  }
  const ArcLength arc(local);
  std::vector<PointF> pts;
  for (int i = 0; i <= samples; ++i) {
    pts.push_back(arc.at(arc.length() * i / samples));
  }
  const double overall_dx = pts.back().x - pts.front().x;
  const double overall_dy = pts.back().y - pts.front().y;
  const bool swapped = std::abs(overall_dy) >= std::abs(overall_dx);
  auto rise = [&](double dx, double dy) { return swapped ? dx : dy; };
  auto run = [&](double dx, double dy) { return swapped ? dy : dx; };
  auto slope = [&](double dx, double dy) {
    double r = run(dx, dy);
    if (std::abs(r) < 1.0) {
      r = r < 0.0 ? -1.0 : 1.0;
    }
    return rise(dx, dy) / r;
  };
  if (run(overall_dx, overall_dy) == 0.0) {
    // Closed loop: the end points coincide and no overall slope exists.
    throw Error("axis end points coincide; MA score is undefined");
  }
  const double overall = rise(overall_dx, overall_dy) / run(overall_dx, overall_dy);
  double deviation = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double dx = pts[static_cast<std::size_t>(i)].x - pts[static_cast<std::size_t>(i - 1)].x;
    const double dy = pts[static_cast<std::size_t>(i)].y - pts[static_cast<std::size_t>(i - 1)].y;
    const double d = std::abs(slope(dx, dy) - overall);
    deviation += d < 1e-9 ? 0.0 : d;
  }
  return (1.0 - deviation / samples) * 100.0;
}

double sobel_score(const BinaryMask& mask, const PatchGrid& grid, double lambda) {
  const auto sums = cell_gradients(mask, grid);
  return lambda * static_cast<double>(std::accumulate(sums.begin(), sums.end(), 0L));
}

double sobel_score(const BinaryMask& mask, double lambda) {
  const auto g = vertical_gradient(mask);
  return lambda * static_cast<double>(std::accumulate(g.begin(), g.end(), 0L));
}

DensityProfile density_profile(const GrayImage& image, const MedialAxis& axis) {
  DensityProfile profile;
  profile.values.reserve(axis.size());
  for (const Point& p : axis.points) {
    if (!image.contains(p.x, p.y)) {
      throw Error("axis point outside the image");
    }
    profile.values.push_back(image(p.x, p.y));
  }
  return profile;
}

std::vector<double> resample_linear(const std::vector<double>& values,
                                    std::size_t length) {
  if (values.empty() || length == 0) {
    throw Error("cannot resample an empty sequence");
  }
  std::vector<double> out(length);
  if (values.size() == 1 || length == 1) {
    std::fill(out.begin(), out.end(), values.front());
    return out;
  }
  const double step = static_cast<double>(values.size() - 1) / static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const double pos = step * static_cast<double>(i);
    const auto lo = std::min(static_cast<std::size_t>(pos), values.size() - 2);
    const double t = pos - static_cast<double>(lo);
    out[i] = (1.0 - t) * values[lo] + t * values[lo + 1];
  }
  return out;
}

double dp_score(const DensityProfile& a, const DensityProfile& b) {
  if (a.values.empty() || b.values.empty()) {
    throw Error("density profiles must be non-empty");
  }
  const auto resampled = resample_linear(b.values, a.values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = (a.values[i] - resampled[i]) / 255.0;
    sum += d * d;
  }
  return sum * 100.0 / static_cast<double>(a.values.size());
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  if (cm.classes < 1 || cm.total() == 0) {
    throw Error("confusion matrix is empty");
  }
  const double total = static_cast<double>(cm.total());
  const int c = cm.classes;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  for (int j = 0; j < c; ++j) {
    double row = 0.0;
    double col = 0.0;
    for (int k = 0; k < c; ++k) {
      row += static_cast<double>(cm(j, k));
      col += static_cast<double>(cm(k, j));
    }
    const double tp = static_cast<double>(cm(j, j));
    const double fn = row - tp;
    const double fp = col - tp;
    const double tn = total - tp - fn - fp;
    accuracy += (tp + tn) / total;
    precision += (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
    recall += (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
  }
  ClassificationMetrics m;
  m.accuracy = accuracy / c;
  m.precision = precision / c;
  m.recall = recall / c;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

} // namespace chromstraight
