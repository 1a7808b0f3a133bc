#include "chromstraight/patch_straighten.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace chromstraight {

namespace {

double chord_angle(PointF from, PointF to) {
  return std::atan2(to.x - from.x, to.y - from.y);
}

} // namespace

PatchSequence extract_patches(const GrayImage& image, const MedialAxis& axis,
                              const PatchOptions& options, double background) {
  const int h = options.patch_h;
  const int w = options.patch_w;
  if (h < 1 || w < 1) {
    throw Error("patch dimensions must be positive");
  }
  if (axis.size() == 0) {
    throw Error("cannot cut patches along an empty axis");
  }
  const ArcLength arc(axis);
  // Pixel extent of the axis: arc length plus the end pixel itself.
  const double extent = arc.length() + 1.0;
  if (extent < h) {
    throw Error("axis spans " + std::to_string(extent) + " px, shorter than patch height " +
                std::to_string(h));
  }
  const int count = static_cast<int>(std::ceil(extent / h - 1e-9));

  // Axis samples every h pixels of arc length bound the patches. Patch k
  // starts at sample k and is rotated toward sample k+1, so neighbouring
  // patches meet on the axis.
  std::vector<PointF> samples;
  for (int k = 0; k <= count; ++k) {
    samples.push_back(arc.at(static_cast<double>(k * h)));
  }
  std::vector<PointF> centers;
  std::vector<double> angles;
  for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
    const PointF a = samples[k];
    const PointF b = samples[k + 1];
    const double angle = chord_angle(a, b);
    const double half = 0.5 * h;
    centers.push_back({a.x + half * std::sin(angle), a.y + half * std::cos(angle)});
    angles.push_back(angle);
  }

  PatchSequence seq;
  seq.patch_h = h;
  seq.patch_w = w;
  seq.background = background;
  const std::uint8_t fill = clamp_to_u8(background);
  for (int k = 0; k < count; ++k) {
    Patch patch;
    patch.center = centers[static_cast<std::size_t>(k)];
    patch.angle = angles[static_cast<std::size_t>(k)];
    patch.pixels = GrayImage(w, h, fill);
    const double tx = std::sin(patch.angle);
    const double ty = std::cos(patch.angle);
    const double nx = ty;
    const double ny = -tx;
    for (int r = 0; r < h; ++r) {
      const double along = r - 0.5 * h;
      for (int u = 0; u < w; ++u) {
        const double across = u - w / 2;
        const double x = patch.center.x + along * tx + across * nx;
        const double y = patch.center.y + along * ty + across * ny;
        patch.pixels(u, r) = clamp_to_u8(sample_bilinear(image, x, y, background));
      }
    }
    seq.patches.push_back(std::move(patch));
  }
  return seq;
}

int rearranged_center_column(const PatchSequence& seq, int out_w) {
  return (out_w - seq.patch_w) / 2 + seq.patch_w / 2;
}

GrayImage rearrange_patches(const PatchSequence& seq, int out_w) {
  if (out_w < seq.patch_w) {
    throw Error("output width is narrower than the patch width");
  }
  if (seq.patches.empty()) {
    throw Error("no patches to rearrange");
  }
  const int h = seq.patch_h;
  GrayImage out(out_w, static_cast<int>(seq.patches.size()) * h, clamp_to_u8(seq.background));
  const int x0 = (out_w - seq.patch_w) / 2;
  for (std::size_t k = 0; k < seq.patches.size(); ++k) {
    const GrayImage& p = seq.patches[k].pixels;
    for (int r = 0; r < h; ++r) {
      for (int u = 0; u < seq.patch_w; ++u) {
        out(x0 + u, static_cast<int>(k) * h + r) = p(u, r);
      }
    }
  }
  return out;
}

StraightenResult ppa_straighten(const GrayImage& image, const StraightenOptions& options) {
  const Segmentation seg = segment(image, options.polarity);
  StraightenResult result;
  result.source_axis = extract_axis(seg.mask, options.axis);
  result.background = seg.background_mean;
  result.threshold = seg.threshold;
  const PatchSequence seq =
      extract_patches(image, result.source_axis, options.patch, seg.background_mean);
  const int out_w = options.out_w > 0 ? options.out_w : options.patch.patch_w;
  result.image = rearrange_patches(seq, out_w);
  const int column = rearranged_center_column(seq, out_w);
  for (int y = 0; y < result.image.height(); ++y) {
    result.output_axis.points.push_back({column, y});
  }
  return result;
}

int bounding_box_width(const BinaryMask& mask) {
  int lo = mask.width();
  int hi = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  return hi >= lo ? hi - lo + 1 : 0;
}

GrayImage ma_straighten(const GrayImage& image, const BinaryMask& mask,
                        const MaOptions& options) {
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error("mask and image dimensions differ");
  }
  const Skeleton skeleton = prune_branches(zhang_suen_thin(mask), options.prune_ratio);
  auto traced = trace_axis(skeleton);
  if (auto* report = std::get_if<BranchReport>(&traced)) {
    throw PruneError("skeleton is not a simple path", *report);
  }
  MedialAxis axis = std::get<MedialAxis>(std::move(traced));
  if (axis.size() < 2) {
    throw Error("medial axis is too short for the MA baseline");
  }

  std::set<std::pair<int, int>> used;
  for (const Point& p : axis.points) {
    used.insert({p.x, p.y});
  }
  auto inside = [&](Point p) {
    return image.contains(p.x, p.y) && !used.contains({p.x, p.y});
  };
  const Direction head_dir = end_direction(axis, true, options.slope_window);
  const Direction tail_dir = end_direction(axis, false, options.slope_window);
  const auto tail = march(axis.points.back(), tail_dir, options.extension, inside);
  for (const Point& p : tail) {
    used.insert({p.x, p.y});
  }
  const auto head = march(axis.points.front(), head_dir, options.extension, inside);
  MedialAxis extended;
  extended.points.assign(head.rbegin(), head.rend());
  extended.points.insert(extended.points.end(), axis.points.begin(), axis.points.end());
  extended.points.insert(extended.points.end(), tail.begin(), tail.end());

  const int scan_w = options.scan_w > 0 ? options.scan_w : bounding_box_width(mask) + 4;
  const double bg = background_mean(image, mask);
  const int n = static_cast<int>(extended.size());
  GrayImage out(scan_w, n, clamp_to_u8(bg));
  for (int i = 0; i < n; ++i) {
    // Local direction from a centered window, oriented along the axis.
    const int lo = std::max(0, i - 2);
    const int hi = std::min(n - 1, i + 2);
    MedialAxis local;
    local.points.assign(extended.points.begin() + lo, extended.points.begin() + hi + 1);
    const Direction d = end_direction(local, false, static_cast<int>(local.size()));
    const double nx = d.dy;
    const double ny = -d.dx;
    const Point c = extended.points[static_cast<std::size_t>(i)];
    for (int u = 0; u < scan_w; ++u) {
      const double across = u - scan_w / 2;
      out(u, i) = clamp_to_u8(sample_bilinear(image, c.x + across * nx, c.y + across * ny, bg));
    }
  }
  return out;
}

} // namespace chromstraight
