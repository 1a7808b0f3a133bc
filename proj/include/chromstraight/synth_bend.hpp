#pragma once

#include "chromstraight/image.hpp"
#include "chromstraight/segmentation.hpp"
#include "chromstraight/skeleton.hpp"

#include <cstdint>
#include <vector>

namespace chromstraight {

inline constexpr double kMinBendFactor = 1.05;
inline constexpr double kMaxBendFactor = 1.35;

/// Control points for one synthetic bend: arc-length fractions, the control
/// factor at each point and the side (+1/-1 along the axis normal) it pushes
/// toward.
struct BendSpec {
  std::vector<double> positions;
  std::vector<double> factors;
  std::vector<int> sides;
  std::uint64_t seed = 0;
};

/// 1-3 control points at sorted fractions in [0.15, 0.85] at least 0.15
/// apart, factors uniform in [1.05, 1.35], sides uniform.
BendSpec sample_bend_spec(std::uint64_t seed);

struct BendOptions {
  double scale = 2.0;          // displacement = (factor - 1) * half-width * (scale * half-width)
  double falloff = 0.25;       // cosine half-span as a fraction of axis length
  double max_fold = 0.8;       // cap on curvature * (half-width + 2)
  double min_source_ma = 95.0; // straightness required of the source
  AxisOptions axis;
};

/// Bends a straight chromosome by displacing its axis along the normal at
/// each control point, blended with a raised-cosine falloff. The bent spine
/// keeps the source arc length and cross-sections stay perpendicular to it,
/// so widths and length are preserved. Amplitudes shrink until the spine is
/// gentle enough not to fold. The canvas grows to fit; pixels are resampled
/// through the inverse map with bilinear interpolation.
GrayImage generate_bent(const GrayImage& image, const BinaryMask& mask,
                        const BendSpec& spec, const BendOptions& options = {});

/// Lateral displacement, in pixels, at arc fraction `t` for the given
/// per-point amplitudes.
double bend_displacement(const BendSpec& spec, const std::vector<double>& amplitudes,
                         double t, double falloff);

} // namespace chromstraight
