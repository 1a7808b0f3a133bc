#include "chromstraight/synth_bend.hpp"

#include "chromstraight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace chromstraight {

BendSpec sample_bend_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(1, 3);
  std::uniform_real_distribution<double> pos_dist(0.15, 0.85);
  std::uniform_real_distribution<double> factor_dist(kMinBendFactor, kMaxBendFactor);
  std::bernoulli_distribution side_dist(0.5);

  BendSpec spec;
  spec.seed = seed;
  const int count = count_dist(rng);
  // Three points 0.15 apart always fit in a 0.7-wide range, so rejection
  // terminates quickly.
  while (true) {
    spec.positions.clear();
    for (int i = 0; i < count; ++i) {
      spec.positions.push_back(pos_dist(rng));
    }
    std::sort(spec.positions.begin(), spec.positions.end());
    bool separated = true;
    for (std::size_t i = 1; i < spec.positions.size(); ++i) {
      separated = separated && spec.positions[i] - spec.positions[i - 1] >= 0.15;
    }
    if (separated) {
      break;
    }
  }
  for (int i = 0; i < count; ++i) {
    spec.factors.push_back(factor_dist(rng));
    spec.sides.push_back(side_dist(rng) ? 1 : -1);
  }
  return spec;
}

double bend_displacement(const BendSpec& spec, const std::vector<double>& amplitudes,
                         double t, double falloff) {
  double d = 0.0;
  for (std::size_t k = 0; k < spec.positions.size(); ++k) {
    const double x = (t - spec.positions[k]) / falloff;
    if (std::abs(x) < 1.0) {
      d += amplitudes[k] * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
    }
  }
  return d;
}

namespace {

// Bent spine sampled densely by arc length, in the (along, across) frame of
// the straight source axis.
struct Spine {
  std::vector<PointF> points;   // (along, across)
  std::vector<PointF> tangents; // unit
  std::vector<double> arc;
  double step = 0.25;

  double length() const { return arc.back(); }

  // Spine position and frame at arc length s, continuing straight past ends.
  void frame(double s, PointF& pos, PointF& tan) const {
    const double clamped = std::clamp(s, 0.0, length());
    auto i = static_cast<std::size_t>(clamped / step);
    i = std::min(i, points.size() - 2);
    const double t = (clamped - arc[i]) / (arc[i + 1] - arc[i]);
    pos = {points[i].x + t * (points[i + 1].x - points[i].x),
           points[i].y + t * (points[i + 1].y - points[i].y)};
    tan = t < 0.5 ? tangents[i] : tangents[i + 1];
    const double over = s - clamped;
    pos.x += over * tan.x;
    pos.y += over * tan.y;
  }
};

// Curve (a, D(a / span)) re-sampled at uniform arc-length steps.
Spine build_spine(const BendSpec& spec, const std::vector<double>& amplitudes,
                  double falloff, double span, double length) {
  const int fine = 4000;
  std::vector<PointF> raw;
  for (int i = 0; i <= fine; ++i) {
    const double phi = static_cast<double>(i) / fine;
    raw.push_back({phi * span, bend_displacement(spec, amplitudes, phi, falloff)});
  }
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < raw.size(); ++i) {
    cum.push_back(cum.back() + std::hypot(raw[i].x - raw[i - 1].x, raw[i].y - raw[i - 1].y));
  }
  Spine spine;
  const int n = std::max(2, static_cast<int>(std::ceil(length / spine.step)) + 1);
  spine.step = length / (n - 1);
  std::size_t j = 0;
  for (int i = 0; i < n; ++i) {
    const double s = std::min(spine.step * i, cum.back());
    while (j + 2 < cum.size() && cum[j + 1] < s) {
      ++j;
    }
    const double seg = cum[j + 1] - cum[j];
    const double t = seg > 0.0 ? std::clamp((s - cum[j]) / seg, 0.0, 1.0) : 0.0;
    spine.points.push_back({raw[j].x + t * (raw[j + 1].x - raw[j].x),
                            raw[j].y + t * (raw[j + 1].y - raw[j].y)});
    spine.arc.push_back(spine.step * i);
  }
  for (std::size_t i = 0; i < spine.points.size(); ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(i + 1, spine.points.size() - 1);
    const double dx = spine.points[b].x - spine.points[a].x;
    const double dy = spine.points[b].y - spine.points[a].y;
    const double norm = std::hypot(dx, dy);
    spine.tangents.push_back({dx / norm, dy / norm});
  }
  return spine;
}

double curve_length(const BendSpec& spec, const std::vector<double>& amplitudes,
                    double falloff, double span) {
  const int fine = 4000;
  double length = 0.0;
  double prev = bend_displacement(spec, amplitudes, 0.0, falloff);
  for (int i = 1; i <= fine; ++i) {
    const double phi = static_cast<double>(i) / fine;
    const double d = bend_displacement(spec, amplitudes, phi, falloff);
    length += std::hypot(span / fine, d - prev);
    prev = d;
  }
  return length;
}

double max_curvature(const Spine& spine) {
  double kappa = 0.0;
  const std::size_t lag = std::max<std::size_t>(1, static_cast<std::size_t>(2.0 / spine.step));
  for (std::size_t i = lag; i + lag < spine.tangents.size(); ++i) {
    const PointF a = spine.tangents[i - lag];
    const PointF b = spine.tangents[i + lag];
    const double turn = std::abs(std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y));
    kappa = std::max(kappa, turn / (2.0 * lag * spine.step));
  }
  return kappa;
}

} // namespace

GrayImage generate_bent(const GrayImage& image, const BinaryMask& mask,
                        const BendSpec& spec, const BendOptions& options) {
  if (spec.positions.size() != spec.factors.size() ||
      spec.positions.size() != spec.sides.size()) {
    throw Error("bend spec fields have mismatched lengths");
  }
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error("mask and image dimensions differ");
  }
  const MedialAxis axis = extract_axis(mask, options.axis);
  if (axis.size() < 7 || ma_score(axis) < options.min_source_ma) {
    throw Error("source chromosome is not straight enough to bend");
  }

  const PointF front{static_cast<double>(axis.points.front().x),
                     static_cast<double>(axis.points.front().y)};
  const PointF back{static_cast<double>(axis.points.back().x),
                    static_cast<double>(axis.points.back().y)};
  const double length = std::hypot(back.x - front.x, back.y - front.y);
  const PointF along{(back.x - front.x) / length, (back.y - front.y) / length};
  const PointF across{along.y, -along.x};

  std::vector<double> amplitudes;
  double widest = 0.0;
  for (std::size_t k = 0; k < spec.positions.size(); ++k) {
    const auto idx = static_cast<std::size_t>(
        std::lround(spec.positions[k] * static_cast<double>(axis.size() - 1)));
    const Point p = axis.points[idx];
    const double half_width =
        0.5 * (foreground_run(mask, p, {across.x, across.y}) +
               foreground_run(mask, p, {-across.x, -across.y}) + 1);
    widest = std::max(widest, half_width);
    amplitudes.push_back(spec.sides[k] * (spec.factors[k] - 1.0) * half_width *
                         options.scale * half_width);
  }

  // Shrink the chord until the bent spine keeps the source length, and damp
  // the amplitudes if the bend would fold the chromosome onto itself.
  Spine spine;
  for (int attempt = 0;; ++attempt) {
    double lo = 0.0;
    double hi = length;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (curve_length(spec, amplitudes, options.falloff, mid) < length ? lo : hi) = mid;
    }
    spine = build_spine(spec, amplitudes, options.falloff, hi, length);
    if (max_curvature(spine) * (widest + 2.0) <= options.max_fold || attempt > 40) {
      break;
    }
    for (double& a : amplitudes) {
      a *= 0.9;
    }
  }

  auto to_frame = [&](double x, double y) {
    const double dx = x - front.x;
    const double dy = y - front.y;
    return PointF{dx * along.x + dy * along.y, dx * across.x + dy * across.y};
  };
  auto from_frame = [&](PointF f) {
    return PointF{front.x + f.x * along.x + f.y * across.x,
                  front.y + f.x * along.y + f.y * across.y};
  };
  auto forward = [&](double x, double y) {
    const PointF f = to_frame(x, y);
    PointF pos;
    PointF tan;
    spine.frame(f.x, pos, tan);
    const PointF bent{pos.x - f.y * tan.y, pos.y + f.y * tan.x};
    return from_frame(bent);
  };

  double min_x = std::numeric_limits<double>::max();
  double min_y = min_x;
  double max_x = std::numeric_limits<double>::lowest();
  double max_y = max_x;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!mask(x, y)) {
        continue;
      }
      const PointF p = forward(x, y);
      min_x = std::min(min_x, p.x);
      min_y = std::min(min_y, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  }
  // Keep the source's margins around the foreground.
  int m_left = image.width();
  int m_top = image.height();
  int m_right = image.width();
  int m_bottom = image.height();
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask(x, y)) {
        m_left = std::min(m_left, x);
        m_top = std::min(m_top, y);
        m_right = std::min(m_right, image.width() - 1 - x);
        m_bottom = std::min(m_bottom, image.height() - 1 - y);
      }
    }
  }
  const int x0 = static_cast<int>(std::floor(min_x)) - m_left;
  const int y0 = static_cast<int>(std::floor(min_y)) - m_top;
  const int out_w = static_cast<int>(std::ceil(max_x)) + m_right - x0 + 1;
  const int out_h = static_cast<int>(std::ceil(max_y)) + m_bottom - y0 + 1;
  if (out_w > 4 * (image.width() + image.height()) ||
      out_h > 4 * (image.width() + image.height())) {
    throw Error("bent chromosome does not fit a bounded canvas");
  }

  const double bg = background_mean(image, mask);
  GrayImage out(out_w, out_h);
  const std::size_t n = spine.points.size();
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const PointF q = to_frame(x + x0, y + y0);
      std::size_t best = 0;
      double best_d2 = std::numeric_limits<double>::max();
      for (std::size_t j = 0; j < n; ++j) {
        const double dx = q.x - spine.points[j].x;
        const double dy = q.y - spine.points[j].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = j;
        }
      }
      const PointF p = spine.points[best];
      const PointF t = spine.tangents[best];
      const double rx = q.x - p.x;
      const double ry = q.y - p.y;
      const double s = spine.arc[best] + rx * t.x + ry * t.y;
      const double u = ry * t.x - rx * t.y;
      const PointF src = from_frame({s, u});
      out(x, y) = clamp_to_u8(sample_bilinear(image, src.x, src.y, bg));
    }
  }
  return out;
}

} // namespace chromstraight
