#pragma once

#include "chromstraight/image.hpp"
#include "chromstraight/segmentation.hpp"
#include "chromstraight/skeleton.hpp"

#include <cstdint>
#include <vector>

namespace chromstraight {

/// `rows` x 2 tiling of an H x W canvas. Cells are indexed row-major:
/// index = row * 2 + col.
struct PatchGrid {
  int height = 0;
  int width = 0;
  int rows = 0;
  int cols = 2;
  int cell_h = 0;
  int cell_w = 0;

  int cell_count() const { return rows * cols; }
  int row_of(int cell) const { return cell / cols; }
  int col_of(int cell) const { return cell % cols; }
  int cell_at(int x, int y) const { return (y / cell_h) * cols + x / cell_w; }
};

PatchGrid split_grid(int height, int width, int rows);

struct MaskSpec {
  std::vector<int> masked_indices;  // sorted, distinct
  double ratio = 0.0;
  std::uint64_t seed = 0;

  bool contains(int cell) const;
};

/// Uniform draw of round(ratio * cells) distinct cells.
MaskSpec sample_mask(const PatchGrid& grid, double ratio, std::uint64_t seed);

struct NoiseParams {
  double mean = 0.0;
  double stddev = 25.0;
};

/// Replaces masked cells with clipped Gaussian noise. Inside a masked cell
/// that contains an axis point, pixels within 2 px of the axis keep their
/// source values.
GrayImage apply_mask(const GrayImage& image, const PatchGrid& grid,
                     const MaskSpec& spec, const MedialAxis& axis,
                     const NoiseParams& noise, std::uint64_t seed);

inline constexpr double kAxisBandRadius = 2.0;

/// Sum of |K * patch| over a standalone binary patch, zero padded, where K is
/// the vertical-derivative Sobel kernel [[1,2,1],[0,0,0],[-1,-2,-1]].
long condition_patch(const BinaryMask& patch);

/// Per-pixel |K * mask| over the whole mask (zero padding at the border).
std::vector<long> vertical_gradient(const BinaryMask& mask);

/// Per-cell sums of the whole-mask vertical gradient. Unlike
/// `condition_patch` on an extracted cell, neighbouring cells provide the
/// context at cell borders, so a bar crossing a border adds nothing there.
std::vector<long> cell_gradients(const BinaryMask& mask, const PatchGrid& grid);

enum class Condition : std::uint8_t { Blank = 0, Straight = 1, Bent = 2 };

/// Rendered intensity for each label.
std::uint8_t condition_value(Condition c);

struct ConditionGrid {
  std::vector<Condition> labels;
  long threshold = 18;

  std::vector<int> cells_with(Condition c) const;
};

/// Blank when a cell holds no foreground, else Bent if its gradient sum is at
/// least `threshold`, else Straight.
ConditionGrid condition_image(const BinaryMask& mask, const PatchGrid& grid,
                              long threshold = 18);

GrayImage render_condition(const PatchGrid& grid, const ConditionGrid& conditions);

struct InferenceRequest {
  ConditionGrid conditions;
  MaskSpec mask;
};

/// Every non-blank cell becomes Straight; exactly `bent_cells` are masked.
InferenceRequest inference_condition(const PatchGrid& grid,
                                     const ConditionGrid& conditions,
                                     const std::vector<int>& bent_cells);

} // namespace chromstraight
