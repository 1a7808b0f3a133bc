// Acceptance checks. Each criterion prints one PASS/FAIL line; pass a
// criterion name to run just that one.

#include "chromstraight/mask_condition.hpp"
#include "chromstraight/metrics.hpp"
#include "chromstraight/patch_straighten.hpp"
#include "chromstraight/pipeline.hpp"
#include "chromstraight/segmentation.hpp"
#include "chromstraight/skeleton.hpp"
#include "chromstraight/synth_bend.hpp"

#include "fixtures.hpp"
#include "otsu_scan.hpp"
#include "reference_thinning.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace chromstraight;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// ---- skeleton oracle ---------------------------------------------------------

BinaryMask random_mask(std::mt19937_64& rng, int kind) {
  BinaryMask m(32, 32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (kind == 0) {
    const double density = 0.3 + 0.4 * u(rng);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) m.set(x, y, u(rng) < density);
  } else {
    // Union of random rectangles and disks: blobby shapes with thick parts.
    const int shapes = 2 + static_cast<int>(u(rng) * 5);
    for (int s = 0; s < shapes; ++s) {
      const double cx = u(rng) * 32, cy = u(rng) * 32;
      const double a = 2 + u(rng) * 8, b = 2 + u(rng) * 8;
      const bool disk = u(rng) < 0.5;
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
          const double dx = x - cx, dy = y - cy;
          const bool in = disk ? (dx * dx) / (a * a) + (dy * dy) / (b * b) <= 1.0
                               : std::abs(dx) <= a && std::abs(dy) <= b;
          if (in) m.set(x, y, true);
        }
    }
  }
  if (m.count() == 0) m.set(16, 16, true);
  return m;
}

Outcome skeleton_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  int mismatches = 0;
  int not_idempotent = 0;
  for (int i = 0; i < 50; ++i) {
    const BinaryMask m = random_mask(rng, i % 2);
    oracle::Grid g(32, std::vector<int>(32, 0));
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) g[y][x] = m(x, y) ? 1 : 0;
    const oracle::Grid ref = oracle::zhang_suen_reference(g);
    const Skeleton skel = zhang_suen_thin(m);
    bool same = true;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) same = same && (skel.pixels(x, y) == (ref[y][x] == 1));
    mismatches += same ? 0 : 1;
    not_idempotent += zhang_suen_thin(skel.pixels).pixels == skel.pixels ? 0 : 1;
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && not_idempotent == 0 && t < 5.0,
          fmt("50 masks, %.0f mismatches, %.0f non-idempotent, %.3f s (limit 5 s)", mismatches,
              not_idempotent, t)};
}

// ---- otsu oracle -----------------------------------------------------------------

Outcome otsu_oracle() {
  std::mt19937_64 rng(77);
  std::vector<Histogram> hists;
  std::uniform_int_distribution<int> count(0, 1000);
  std::uniform_int_distribution<int> bin(0, 255);
  while (hists.size() < 1000) {
    Histogram h;
    const int kind = static_cast<int>(hists.size() % 3);
    if (kind == 0) {
      for (auto& b : h.bins) b = static_cast<std::uint64_t>(count(rng));
    } else if (kind == 1) {
      const int populated = 2 + static_cast<int>(rng() % 6);
      for (int k = 0; k < populated; ++k) h.bins[bin(rng)] += 1 + rng() % 1000;
    } else {
      const double m0 = bin(rng), m1 = bin(rng);
      std::normal_distribution<double> g0(m0, 5 + rng() % 20), g1(m1, 5 + rng() % 20);
      for (int k = 0; k < 3000; ++k) {
        const double v = std::round(k % 2 ? g0(rng) : g1(rng));
        if (v >= 0 && v <= 255) ++h.bins[static_cast<std::size_t>(v)];
      }
    }
    int populated = 0;
    for (auto b : h.bins) populated += b > 0;
    if (populated >= 2) hists.push_back(h);
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> got;
  for (const auto& h : hists) got.push_back(otsu_threshold(h));
  const double t = seconds_since(start);
  int mismatches = 0;
  for (std::size_t i = 0; i < hists.size(); ++i) {
    mismatches += got[i] == oracle::otsu_exhaustive(hists[i].bins) ? 0 : 1;
  }
  return {mismatches == 0 && t < 1.0,
          fmt("1000 histograms, %.0f mismatches, %.4f s (limit 1 s)", mismatches, t)};
}

// ---- metric units -------------------------------------------------------------------

Outcome metric_units() {
  std::vector<std::string> failed;
  if (l_score(120, 120) != 100.0) failed.push_back("l_score");
  MedialAxis vertical, diagonal, horizontal;
  for (int i = 0; i < 40; ++i) {
    vertical.points.push_back({5, i});
    diagonal.points.push_back({i, i});
    horizontal.points.push_back({i, 3});
  }
  if (ma_score(vertical) != 100.0 || ma_score(diagonal) != 100.0 ||
      ma_score(horizontal) != 100.0) {
    failed.push_back("ma_score");
  }
  DensityProfile p{{10, 50, 200, 255, 0, 90}};
  if (dp_score(p, p) != 0.0) failed.push_back("dp_score");
  ConfusionMatrix cm(4);
  for (int k = 0; k < 4; ++k) cm(k, k) = 7 + static_cast<std::uint64_t>(k);
  const auto c = classification_metrics(cm);
  if (c.accuracy != 1.0 || c.precision != 1.0 || c.recall != 1.0 || c.f1 != 1.0) {
    failed.push_back("classification");
  }
  if (sobel_score(BinaryMask(32, 128)) != 0.0 ||
      sobel_score(BinaryMask(32, 128), split_grid(128, 32, 16)) != 0.0) {
    failed.push_back("sobel_score");
  }
  std::string detail = "l, ma, dp, classification, sobel exact";
  if (!failed.empty()) {
    detail = "not exact:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

// ---- straightening fixtures ----------------------------------------------------------

Outcome straightening() {
  const auto start = std::chrono::steady_clock::now();
  const int n = 100;
  double ma_sum = 0.0;
  double l_sum = 0.0;
  int decreased = 0;
  int errors = 0;
  StraightenOptions opts;
  opts.out_w = 32;
  for (int i = 0; i < n; ++i) {
    try {
      const GrayImage src = testing::striped_bar(testing::random_bar_params(1000 + i));
      const Segmentation src_seg = segment(src);
      const MedialAxis src_axis = extract_axis(src_seg.mask);
      const GrayImage bent = generate_bent(src, src_seg.mask, sample_bend_spec(5000 + i));
      const StraightenResult r = ppa_straighten(bent, opts);
      const Segmentation out_seg = segment(r.image);
      const MedialAxis out_axis = extract_axis(out_seg.mask);
      ma_sum += ma_score(out_axis);
      l_sum += l_score(out_axis, src_axis.size());
      decreased += sobel_score(out_seg.mask) < sobel_score(segment(bent).mask) ? 1 : 0;
    } catch (const std::exception&) {
      ++errors;  // scores 0 and counts as no decrease
    }
  }
  const double t = seconds_since(start);
  const double ma = ma_sum / n;
  const double l = l_sum / n;
  const bool pass = ma >= 93.0 && l >= 90.0 && decreased >= 95 && t < 60.0;
  return {pass, fmt("mean MA %.2f (>= 93), mean L %.2f (>= 90), sobel decreased %.0f/100 "
                    "(>= 95), %.1f s",
                    ma, l, decreased, t) +
                    (errors ? fmt(", %.0f fixtures raised", errors) : std::string())};
}

// ---- masking contract ------------------------------------------------------------------

Outcome masking() {
  const PatchGrid grid = split_grid(128, 32, 16);
  std::mt19937_64 rng(5);
  GrayImage img(32, 128);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng() % 256);
  // A wavy axis that crosses between the two grid columns.
  MedialAxis axis;
  for (int y = 4; y < 124; ++y) {
    axis.points.push_back({static_cast<int>(std::lround(16 + 7 * std::sin(y / 9.0))), y});
  }
  std::vector<Point> band;
  std::set<int> touched;
  for (const Point& a : axis.points) touched.insert((a.y / grid.cell_h) * 2 + a.x / grid.cell_w);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 32; ++x)
      for (const Point& a : axis.points)
        if ((a.x - x) * (a.x - x) + (a.y - y) * (a.y - y) <= 4) {
          band.push_back({x, y});
          break;
        }

  const int seeds = 10000;
  int wrong_count = 0;
  int band_violations = 0;
  std::vector<int> freq(32, 0);
  for (int s = 0; s < seeds; ++s) {
    const MaskSpec spec = sample_mask(grid, 0.70, static_cast<std::uint64_t>(s));
    wrong_count += spec.masked_indices.size() == 22 ? 0 : 1;
    for (int c : spec.masked_indices) ++freq[static_cast<std::size_t>(c)];
    const GrayImage out = apply_mask(img, grid, spec, axis, {128.0, 25.0},
                                     static_cast<std::uint64_t>(s) * 31 + 7);
    for (const Point& p : band) {
      const int cell = (p.y / grid.cell_h) * 2 + p.x / grid.cell_w;
      if (spec.contains(cell) && touched.contains(cell) && out(p.x, p.y) != img(p.x, p.y)) {
        ++band_violations;
      }
    }
  }
  double worst = 0.0;
  for (int f : freq) worst = std::max(worst, std::abs(f / double(seeds) - 22.0 / 32.0));
  const bool pass = wrong_count == 0 && worst <= 0.02 && band_violations == 0;
  return {pass, fmt("%.0f seeds, %.0f with a count other than 22, worst per-cell frequency "
                    "deviation %.4f (<= 0.02), %.0f band pixels altered",
                    seeds, wrong_count, worst, band_violations)};
}

// ---- fold integrity ------------------------------------------------------------------------

Outcome folds() {
  std::mt19937_64 rng(99);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Manifest m;
    const int reals = 1 + static_cast<int>(rng() % 60);
    const int groups = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(reals));
    for (int r = 0; r < reals; ++r) {
      SampleEntry e;
      e.id = "r" + std::to_string(r);
      e.image_path = e.id + ".png";
      e.group_id = "g" + std::to_string(rng() % static_cast<std::uint64_t>(groups));
      m.samples.push_back(e);
      const int variants = static_cast<int>(rng() % 6);
      for (int v = 0; v < variants; ++v) {
        SampleEntry s = e;
        s.id = e.id + "_v" + std::to_string(v);
        s.kind = SampleKind::Synthetic;
        m.samples.push_back(s);
      }
    }
    for (std::size_t i = m.samples.size(); i > 1; --i) std::swap(m.samples[i - 1], m.samples[rng() % i]);
    const int k = 2 + static_cast<int>(rng() % 9);
    apply_folds(m, assign_folds(m, k, rng()), k, static_cast<int>(rng() % static_cast<std::uint64_t>(k)));
    std::map<std::string, std::pair<int, Split>> seen;
    for (const SampleEntry& e : m.samples) {
      const auto [it, fresh] = seen.try_emplace(e.group_id, *e.fold, e.split);
      if (!fresh && (it->second.first != *e.fold || it->second.second != e.split)) {
        ++violations;
        break;
      }
    }
  }
  return {violations == 0, fmt("1000 manifests, %.0f with a group spanning folds", violations)};
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"skeleton_oracle", skeleton_oracle}, {"otsu_oracle", otsu_oracle},
      {"metric_units", metric_units},       {"straightening_fixtures", straightening},
      {"masking_contract", masking},        {"fold_integrity", folds}};
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  int ran = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && only != name) continue;
    ++ran;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  if (ran == 0) {
    std::printf("unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
