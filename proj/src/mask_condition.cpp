#include "chromstraight/mask_condition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace chromstraight {

PatchGrid split_grid(int height, int width, int rows) {
  if (rows < 1 || height < 1 || width < 2) {
    throw Error("grid needs positive height, width >= 2 and rows >= 1");
  }
  if (height % rows != 0) {
    throw Error("height " + std::to_string(height) + " is not divisible by " +
                std::to_string(rows) + " rows");
  }
  if (width % 2 != 0) {
    throw Error("width " + std::to_string(width) + " is not even");
  }
  PatchGrid grid;
  grid.height = height;
  grid.width = width;
  grid.rows = rows;
  grid.cols = 2;
  grid.cell_h = height / rows;
  grid.cell_w = width / 2;
  return grid;
}

bool MaskSpec::contains(int cell) const {
  return std::binary_search(masked_indices.begin(), masked_indices.end(), cell);
}

MaskSpec sample_mask(const PatchGrid& grid, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error("mask ratio must lie in [0, 1]");
  }
  const int cells = grid.cell_count();
  const int count = static_cast<int>(std::lround(ratio * cells));
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, cells - 1);
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(pick(rng))]);
  }
  MaskSpec spec;
  spec.masked_indices.assign(order.begin(), order.begin() + count);
  std::sort(spec.masked_indices.begin(), spec.masked_indices.end());
  spec.ratio = ratio;
  spec.seed = seed;
  return spec;
}

GrayImage apply_mask(const GrayImage& image, const PatchGrid& grid,
                     const MaskSpec& spec, const MedialAxis& axis,
                     const NoiseParams& noise, std::uint64_t seed) {
  if (image.width() != grid.width || image.height() != grid.height) {
    throw Error("image does not match the patch grid");
  }
  std::vector<bool> on_axis(static_cast<std::size_t>(grid.cell_count()), false);
  for (const Point& p : axis.points) {
    if (image.contains(p.x, p.y)) {
      on_axis[static_cast<std::size_t>(grid.cell_at(p.x, p.y))] = true;
    }
  }
  BinaryMask band(image.width(), image.height());
  const int r = static_cast<int>(kAxisBandRadius);
  for (const Point& p : axis.points) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy <= kAxisBandRadius * kAxisBandRadius &&
            band.contains(p.x + dx, p.y + dy)) {
          band.set(p.x + dx, p.y + dy, true);
        }
      }
    }
  }

  GrayImage out = image;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(noise.mean, noise.stddev > 0.0 ? noise.stddev : 1.0);
  for (const int cell : spec.masked_indices) {
    if (cell < 0 || cell >= grid.cell_count()) {
      throw Error("masked cell index out of range");
    }
    const int x0 = grid.col_of(cell) * grid.cell_w;
    const int y0 = grid.row_of(cell) * grid.cell_h;
    const bool keep_band = on_axis[static_cast<std::size_t>(cell)];
    for (int y = y0; y < y0 + grid.cell_h; ++y) {
      for (int x = x0; x < x0 + grid.cell_w; ++x) {
        // Draw for every pixel so the noise field does not depend on the axis.
        const double value = noise.stddev > 0.0 ? gauss(rng) : noise.mean;
        if (keep_band && band(x, y)) {
          continue;
        }
        out(x, y) = clamp_to_u8(value);
      }
    }
  }
  return out;
}

long condition_patch(const BinaryMask& patch) {
  const auto g = vertical_gradient(patch);
  return std::accumulate(g.begin(), g.end(), 0L);
}

std::vector<long> vertical_gradient(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<long> out(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      long response = 0;
      for (int dx = -1; dx <= 1; ++dx) {
        const long weight = dx == 0 ? 2 : 1;
        response += weight * (mask.at(x + dx, y - 1) ? 1 : 0);
        response -= weight * (mask.at(x + dx, y + 1) ? 1 : 0);
      }
      out[static_cast<std::size_t>(y) * w + x] = std::labs(response);
    }
  }
  return out;
}

std::vector<long> cell_gradients(const BinaryMask& mask, const PatchGrid& grid) {
  if (mask.width() != grid.width || mask.height() != grid.height) {
    throw Error("mask does not match the patch grid");
  }
  const auto g = vertical_gradient(mask);
  std::vector<long> sums(static_cast<std::size_t>(grid.cell_count()), 0);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      sums[static_cast<std::size_t>(grid.cell_at(x, y))] +=
          g[static_cast<std::size_t>(y) * grid.width + x];
    }
  }
  return sums;
}

std::uint8_t condition_value(Condition c) {
  switch (c) {
  case Condition::Bent:
    return 255;
  case Condition::Straight:
    return 128;
  case Condition::Blank:
    break;
  }
  return 0;
}

std::vector<int> ConditionGrid::cells_with(Condition c) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == c) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

ConditionGrid condition_image(const BinaryMask& mask, const PatchGrid& grid,
                              long threshold) {
  const auto sums = cell_gradients(mask, grid);
  std::vector<bool> occupied(static_cast<std::size_t>(grid.cell_count()), false);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (mask(x, y)) {
        occupied[static_cast<std::size_t>(grid.cell_at(x, y))] = true;
      }
    }
  }
  ConditionGrid out;
  out.threshold = threshold;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    if (!occupied[i]) {
      out.labels.push_back(Condition::Blank);
    } else {
      out.labels.push_back(sums[i] >= threshold ? Condition::Bent : Condition::Straight);
    }
  }
  return out;
}

GrayImage render_condition(const PatchGrid& grid, const ConditionGrid& conditions) {
  if (static_cast<int>(conditions.labels.size()) != grid.cell_count()) {
    throw Error("condition labels do not match the patch grid");
  }
  GrayImage out(grid.width, grid.height);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      out(x, y) = condition_value(
          conditions.labels[static_cast<std::size_t>(grid.cell_at(x, y))]);
    }
  }
  return out;
}

InferenceRequest inference_condition(const PatchGrid& grid,
                                     const ConditionGrid& conditions,
                                     const std::vector<int>& bent_cells) {
  if (static_cast<int>(conditions.labels.size()) != grid.cell_count()) {
    throw Error("condition labels do not match the patch grid");
  }
  InferenceRequest request;
  request.conditions.threshold = conditions.threshold;
  for (const Condition c : conditions.labels) {
    request.conditions.labels.push_back(c == Condition::Blank ? Condition::Blank
                                                              : Condition::Straight);
  }
  std::vector<int> cells = bent_cells;
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  for (const int c : cells) {
    if (c < 0 || c >= grid.cell_count()) {
      throw Error("bent cell index out of range");
    }
  }
  request.mask.masked_indices = std::move(cells);
  request.mask.ratio = grid.cell_count() > 0
                           ? static_cast<double>(request.mask.masked_indices.size()) /
                                 grid.cell_count()
                           : 0.0;
  return request;
}

} // namespace chromstraight
