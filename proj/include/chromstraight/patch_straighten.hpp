#pragma once

#include "chromstraight/image.hpp"
#include "chromstraight/segmentation.hpp"
#include "chromstraight/skeleton.hpp"

#include <optional>
#include <vector>

namespace chromstraight {

struct PatchOptions {
  int patch_h = 8;
  int patch_w = 16;
};

/// One rotated rectangle cut from the source. `angle` is measured from the
/// downward vertical, so a top-to-bottom vertical axis gives 0.
struct Patch {
  PointF center;
  double angle = 0.0;
  GrayImage pixels;
};

struct PatchSequence {
  std::vector<Patch> patches;
  int patch_h = 0;
  int patch_w = 0;
  double background = 255.0;
};

/// Cuts consecutive patch_h-tall patches along the axis. Axis samples every
/// patch_h pixels of arc length bound the patches: patch k runs from sample k
/// along the chord to sample k+1, with its center half a patch down that
/// chord. The final sample is extrapolated along the end direction when the
/// axis is not a multiple of patch_h. Samples outside the image take the
/// background value.
PatchSequence extract_patches(const GrayImage& image, const MedialAxis& axis,
                              const PatchOptions& options, double background);

/// Stacks patches top to bottom with their centers on column
/// (out_w - patch_w) / 2 + patch_w / 2.
GrayImage rearrange_patches(const PatchSequence& seq, int out_w);

/// Column that carries the patch centers in `rearrange_patches` output.
int rearranged_center_column(const PatchSequence& seq, int out_w);

struct StraightenOptions {
  PatchOptions patch;
  AxisOptions axis;
  Polarity polarity = Polarity::DarkForeground;
  int out_w = 0;  // 0 = patch width
};

struct StraightenResult {
  GrayImage image;
  MedialAxis source_axis;
  MedialAxis output_axis;  // vertical center line of the output
  double background = 0.0;
  int threshold = 0;
};

/// Segment, extract the medial axis, cut patches and rearrange them.
StraightenResult ppa_straighten(const GrayImage& image,
                                const StraightenOptions& options = {});

struct MaOptions {
  int extension = 30;
  int slope_window = 5;
  int scan_w = 0;  // 0 = mask bounding-box width + 4
  double prune_ratio = 0.1;
};

/// Medial-axis baseline: extend the thinned axis at both ends, then emit one
/// perpendicular scan line per axis point.
GrayImage ma_straighten(const GrayImage& image, const BinaryMask& mask,
                        const MaOptions& options = {});

/// Width of the foreground bounding box.
int bounding_box_width(const BinaryMask& mask);

} // namespace chromstraight
