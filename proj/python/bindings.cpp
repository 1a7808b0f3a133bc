#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chromstraight/mask_condition.hpp"
#include "chromstraight/metrics.hpp"
#include "chromstraight/patch_straighten.hpp"
#include "chromstraight/pipeline.hpp"
#include "chromstraight/segmentation.hpp"
#include "chromstraight/skeleton.hpp"
#include "chromstraight/synth_bend.hpp"

namespace py = pybind11;
using namespace chromstraight;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;
using AxisList = std::vector<std::pair<int, int>>;

GrayImage to_image(const ImageArray& a) {
  if (a.ndim() != 2) throw Error("expected a 2-D uint8 array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  GrayImage img(w, h);
  std::copy(a.data(), a.data() + a.size(), img.pixels().begin());
  return img;
}

py::array_t<std::uint8_t> from_image(const GrayImage& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

BinaryMask to_mask(const MaskArray& a) {
  if (a.ndim() != 2) throw Error("expected a 2-D boolean array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  BinaryMask m(w, h);
  const bool* p = a.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, p[y * w + x]);
  return m;
}

py::array_t<bool> from_mask(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  bool* p = out.mutable_data();
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) p[y * m.width() + x] = m(x, y);
  return out;
}

MedialAxis to_axis(const AxisList& pts) {
  MedialAxis axis;
  for (const auto& [x, y] : pts) axis.points.push_back({x, y});
  return axis;
}

AxisList from_axis(const MedialAxis& axis) {
  AxisList out;
  for (const Point& p : axis.points) out.emplace_back(p.x, p.y);
  return out;
}

Polarity parse_polarity(const std::string& s) {
  if (s == "dark") return Polarity::DarkForeground;
  if (s == "light") return Polarity::LightForeground;
  throw Error("polarity must be 'dark' or 'light'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chromosome straightening: segmentation, medial axes, patch "
            "straightening, masking, synthetic bending and metrics.";

  py::register_exception<Error>(m, "ChromstraightError", PyExc_RuntimeError);

  m.def("load_png", [](const std::filesystem::path& p) { return from_image(load_png(p)); },
        py::arg("path"));
  m.def("save_png",
        [](const ImageArray& a, const std::filesystem::path& p) { save_png(to_image(a), p); },
        py::arg("image"), py::arg("path"));

  m.def(
      "otsu_threshold",
      [](const std::vector<std::uint64_t>& bins) {
        if (bins.size() != 256) throw Error("histogram needs 256 bins");
        Histogram h;
        std::copy(bins.begin(), bins.end(), h.bins.begin());
        return otsu_threshold(h);
      },
      py::arg("bins"));
  m.def(
      "segment",
      [](const ImageArray& a, const std::string& polarity) {
        const Segmentation s = segment(to_image(a), parse_polarity(polarity));
        py::dict d;
        d["mask"] = from_mask(s.mask);
        d["threshold"] = s.threshold;
        d["background_mean"] = s.background_mean;
        return d;
      },
      py::arg("image"), py::arg("polarity") = "dark");

  m.def("zhang_suen_thin",
        [](const MaskArray& a) { return from_mask(zhang_suen_thin(to_mask(a)).pixels); },
        py::arg("mask"));
  m.def(
      "extract_axis",
      [](const MaskArray& a, double prune_ratio, int gap_threshold) {
        AxisOptions o;
        o.prune_ratio = prune_ratio;
        o.gap_threshold = gap_threshold;
        return from_axis(extract_axis(to_mask(a), o));
      },
      py::arg("mask"), py::arg("prune_ratio") = 0.1, py::arg("gap_threshold") = 6);

  m.def(
      "ppa_straighten",
      [](const ImageArray& a, int patch_h, int patch_w, int out_w, double prune_ratio,
         const std::string& polarity) {
        StraightenOptions o;
        o.patch = {patch_h, patch_w};
        o.out_w = out_w;
        o.axis.prune_ratio = prune_ratio;
        o.polarity = parse_polarity(polarity);
        const StraightenResult r = ppa_straighten(to_image(a), o);
        py::dict d;
        d["image"] = from_image(r.image);
        d["source_axis"] = from_axis(r.source_axis);
        d["output_axis"] = from_axis(r.output_axis);
        d["background"] = r.background;
        return d;
      },
      py::arg("image"), py::arg("patch_h") = 8, py::arg("patch_w") = 16, py::arg("out_w") = 0,
      py::arg("prune_ratio") = 0.1, py::arg("polarity") = "dark");
  m.def(
      "ma_straighten",
      [](const ImageArray& a, const std::string& polarity) {
        const GrayImage img = to_image(a);
        return from_image(ma_straighten(img, segment(img, parse_polarity(polarity)).mask));
      },
      py::arg("image"), py::arg("polarity") = "dark");

  m.def(
      "sample_bend_spec",
      [](std::uint64_t seed) {
        const BendSpec s = sample_bend_spec(seed);
        py::dict d;
        d["positions"] = s.positions;
        d["factors"] = s.factors;
        d["sides"] = s.sides;
        return d;
      },
      py::arg("seed"));
  m.def(
      "generate_bent",
      [](const ImageArray& a, std::uint64_t seed, const std::string& polarity) {
        const GrayImage img = to_image(a);
        const BinaryMask mask = segment(img, parse_polarity(polarity)).mask;
        return from_image(generate_bent(img, mask, sample_bend_spec(seed)));
      },
      py::arg("image"), py::arg("seed"), py::arg("polarity") = "dark");

  m.def(
      "sample_mask",
      [](double ratio, std::uint64_t seed, int height, int width, int rows) {
        return sample_mask(split_grid(height, width, rows), ratio, seed).masked_indices;
      },
      py::arg("ratio") = 0.70, py::arg("seed") = 0, py::arg("height") = 128,
      py::arg("width") = 32, py::arg("rows") = 16);
  m.def(
      "apply_mask",
      [](const ImageArray& a, const std::vector<int>& cells, const AxisList& axis, int rows,
         double mean, double stddev, std::uint64_t seed) {
        const GrayImage img = to_image(a);
        const PatchGrid grid = split_grid(img.height(), img.width(), rows);
        MaskSpec spec;
        spec.masked_indices = cells;
        std::sort(spec.masked_indices.begin(), spec.masked_indices.end());
        return from_image(apply_mask(img, grid, spec, to_axis(axis), {mean, stddev}, seed));
      },
      py::arg("image"), py::arg("cells"), py::arg("axis"), py::arg("rows") = 16,
      py::arg("mean") = 0.0, py::arg("stddev") = 25.0, py::arg("seed") = 0);
  m.def(
      "condition_image",
      [](const MaskArray& a, int rows, long threshold) {
        const BinaryMask mask = to_mask(a);
        const PatchGrid grid = split_grid(mask.height(), mask.width(), rows);
        const ConditionGrid c = condition_image(mask, grid, threshold);
        std::vector<int> labels;
        for (const Condition l : c.labels) labels.push_back(static_cast<int>(l));
        return py::make_tuple(labels, from_image(render_condition(grid, c)));
      },
      py::arg("mask"), py::arg("rows") = 16, py::arg("threshold") = 18);

  m.def("l_score", py::overload_cast<std::size_t, std::size_t>(&l_score), py::arg("predicted"),
        py::arg("target"));
  m.def(
      "ma_score", [](const AxisList& axis, int samples) { return ma_score(to_axis(axis), samples); },
      py::arg("axis"), py::arg("samples") = 6);
  m.def(
      "sobel_score", [](const MaskArray& a, double lambda) { return sobel_score(to_mask(a), lambda); },
      py::arg("mask"), py::arg("scale") = kSobelScale);
  m.def(
      "density_profile",
      [](const ImageArray& a, const AxisList& axis) {
        return density_profile(to_image(a), to_axis(axis)).values;
      },
      py::arg("image"), py::arg("axis"));
  m.def(
      "dp_score",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return dp_score(DensityProfile{a}, DensityProfile{b});
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "classification_metrics",
      [](const std::vector<std::vector<std::uint64_t>>& rows) {
        ConfusionMatrix cm(static_cast<int>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != rows.size()) throw Error("confusion matrix must be square");
          for (std::size_t j = 0; j < rows.size(); ++j)
            cm(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
        }
        const auto c = classification_metrics(cm);
        py::dict d;
        d["accuracy"] = c.accuracy;
        d["precision"] = c.precision;
        d["recall"] = c.recall;
        d["f1"] = c.f1;
        return d;
      },
      py::arg("matrix"));
  m.def(
      "evaluate_pair",
      [](const ImageArray& input, const ImageArray& output, std::optional<ImageArray> reference) {
        std::optional<GrayImage> ref;
        if (reference) ref = to_image(*reference);
        const ScoreReport s =
            evaluate_pair(to_image(input), to_image(output), ref ? &*ref : nullptr, RunConfig{});
        py::dict d;
        d["l_score"] = s.l_score;
        d["ma_score"] = s.ma_score;
        d["sobel_score"] = s.sobel_score;
        d["dp_score"] = s.dp_score;
        return d;
      },
      py::arg("input"), py::arg("output"), py::arg("reference") = py::none());

  m.def("derive_seed", &derive_seed, py::arg("run_seed"), py::arg("key"));
}
