#pragma once

#include "chromstraight/image.hpp"
#include "chromstraight/segmentation.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace chromstraight {

/// One-pixel-thick centerline pixels on the raster of their source mask.
struct Skeleton {
  BinaryMask pixels;

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }
  std::size_t count() const { return pixels.count(); }
  friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

/// Ordered end-to-end centerline.
struct MedialAxis {
  std::vector<Point> points;

  /// Sum of Euclidean distances between consecutive points.
  double arc_length() const;
  std::size_t size() const { return points.size(); }
};

/// Arc-length parameterization of an axis polyline. Positions before the
/// start or past the end continue straight along the end directions.
class ArcLength {
public:
  /// `smoothing` > 1 measures along a centered moving average of the
  /// points (window shrinks near the ends, so endpoints stay fixed).
  explicit ArcLength(const MedialAxis& axis, int end_window = 5, int smoothing = 1);

  double length() const { return cumulative_.back(); }
  PointF at(double s) const;

private:
  std::vector<PointF> points_;
  std::vector<double> cumulative_;
  PointF head_dir_;
  PointF tail_dir_;
};

/// A terminal run of skeleton pixels from an endpoint up to (excluding) the
/// junction it attaches to.
struct Branch {
  std::vector<Point> pixels;
  Point junction;

  std::size_t length() const { return pixels.size(); }
};

/// Why a skeleton is not a simple path.
struct BranchReport {
  std::vector<Point> junctions;
  std::vector<Branch> branches;

  std::string describe() const;
};

/// Raised when pruning cannot reduce the skeleton to a simple path.
class PruneError : public Error {
public:
  PruneError(const std::string& what, BranchReport report)
      : Error(what), report_(std::move(report)) {}
  const BranchReport& report() const { return report_; }

private:
  BranchReport report_;
};

/// Zhang-Suen two-subpass thinning, iterated to a fixpoint.
Skeleton zhang_suen_thin(const BinaryMask& mask);

/// Orders a skeleton that forms a simple path; otherwise returns the junctions
/// and terminal branches. Throws on disconnected or cyclic skeletons.
std::variant<MedialAxis, BranchReport> trace_axis(const Skeleton& skeleton);

/// Removes short spurs until the skeleton is a simple path. A spur qualifies
/// when its pixel count is at most `prune_ratio` times the skeleton size at
/// entry; the longest endpoint-to-endpoint route is always kept.
Skeleton prune_branches(const Skeleton& skeleton, double prune_ratio = 0.1);

struct Direction {
  double dx = 0.0;
  double dy = 0.0;
};

/// Least-squares direction through the last `window` points of one end,
/// pointing outward. `at_front` selects the first point as the end.
Direction end_direction(const MedialAxis& axis, bool at_front, int window = 5);

/// Number of unit steps from `from` along `dir` that stay on the foreground.
int foreground_run(const BinaryMask& mask, Point from, Direction dir);

/// Grows each end whose outward run to the background exceeds
/// `gap_threshold`, stepping along the end direction until the next step
/// would leave the foreground.
MedialAxis extend_axis(const MedialAxis& axis, const BinaryMask& mask,
                       int gap_threshold = 6, int direction_window = 5);

struct AxisOptions {
  double prune_ratio = 0.1;
  int gap_threshold = 6;
  int direction_window = 5;
};

/// Thin -> prune -> trace -> extend.
MedialAxis extract_axis(const BinaryMask& mask, const AxisOptions& options = {});

/// Rounded unit steps from `from` along `dir`, collected while `keep`
/// accepts the next pixel, for at most `max_steps` steps. Steps that round
/// onto the previous pixel are skipped.
std::vector<Point> march(Point from, Direction dir, int max_steps,
                         const std::function<bool(Point)>& keep);

} // namespace chromstraight
