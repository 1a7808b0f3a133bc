#pragma once

#include "chromstraight/image.hpp"
#include "chromstraight/mask_condition.hpp"
#include "chromstraight/segmentation.hpp"
#include "chromstraight/skeleton.hpp"

#include <optional>
#include <vector>

namespace chromstraight {

/// (1 - |l - l'| / l') * 100 with l the predicted skeleton pixel count. Not
/// clamped; very long predictions go negative.
double l_score(std::size_t predicted_len, std::size_t target_len);
double l_score(const MedialAxis& predicted, std::size_t target_len);

/// Straightness of an axis from the deviation between local and overall
/// slopes at `samples + 1` points spaced evenly by arc length.
///
/// Slopes are taken as run over rise (dx/dy) when the axis is closer to
/// vertical, and rise over run otherwise, so the metric is finite for the
/// vertical axes straightening produces. Local segments shorter than one
/// pixel along the dominant direction are clamped to one pixel.
double ma_score(const MedialAxis& axis, int samples = 6);

inline constexpr double kSobelScale = 0.01;

/// lambda * sum of per-cell vertical gradient sums.
double sobel_score(const BinaryMask& mask, const PatchGrid& grid,
                   double lambda = kSobelScale);

/// Same quantity on an arbitrary raster: cells tile the image, so the sum
/// is the whole-mask gradient total.
double sobel_score(const BinaryMask& mask, double lambda = kSobelScale);

struct DensityProfile {
  std::vector<double> values;
};

DensityProfile density_profile(const GrayImage& image, const MedialAxis& axis);

/// Linear resampling of `values` to `length` samples, end points aligned.
std::vector<double> resample_linear(const std::vector<double>& values,
                                    std::size_t length);

/// Mean squared difference of the [0,1]-normalized profiles times 100, after
/// resampling `b` to the length of `a`.
double dp_score(const DensityProfile& a, const DensityProfile& b);

struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::uint64_t> counts;  // row = true class, column = predicted

  explicit ConfusionMatrix(int n = 0)
      : classes(n), counts(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}
  std::uint64_t& operator()(int truth, int predicted) {
    return counts[static_cast<std::size_t>(truth) * classes + predicted];
  }
  std::uint64_t operator()(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * classes + predicted];
  }
  std::uint64_t total() const;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Macro averages over classes; F1 combines the macro precision and recall.
/// Classes with a zero denominator contribute 0.
ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

struct ScoreReport {
  double l_score = 0.0;
  double ma_score = 0.0;
  double sobel_score = 0.0;
  double dp_score = 0.0;
  std::optional<double> lpips;
};

} // namespace chromstraight
