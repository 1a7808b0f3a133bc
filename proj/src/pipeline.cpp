#include "chromstraight/pipeline.hpp"

#include "chromstraight/mask_condition.hpp"
#include "chromstraight/patch_straighten.hpp"
#include "chromstraight/skeleton.hpp"
#include "chromstraight/synth_bend.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace chromstraight {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed ") + what + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw Error("unknown split '" + s + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void record(RunReport& report, std::mutex& mu, const std::string& id, const std::string& stage,
            const std::exception& e) {
  std::lock_guard lock(mu);
  report.failures.push_back({id, stage, e.what()});
}

void sort_failures(RunReport& report, const Manifest& order) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.samples.size(); ++i) {
    rank.emplace(order.samples[i].id, i);
  }
  std::stable_sort(report.failures.begin(), report.failures.end(),
                   [&](const SampleFailure& a, const SampleFailure& b) {
                     return rank[a.id] < rank[b.id];
                   });
}

StraightenOptions straighten_options(const RunConfig& c) {
  StraightenOptions o;
  o.patch = {c.patch_h, c.patch_w};
  o.axis.prune_ratio = c.prune_ratio;
  o.polarity = c.polarity;
  o.out_w = c.canvas_w;
  return o;
}

} // namespace

// ---- config -----------------------------------------------------------------

RunConfig config_from_json_text(const std::string& text) {
  const json j = parse_json(text, "config");
  if (!j.is_object()) {
    throw Error("config must be a JSON object");
  }
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "patch_h") c.patch_h = v.get<int>();
      else if (key == "patch_w") c.patch_w = v.get<int>();
      else if (key == "mask_ratio") c.mask_ratio = v.get<double>();
      else if (key == "threshold_t") c.threshold_t = v.get<long>();
      else if (key == "prune_ratio") c.prune_ratio = v.get<double>();
      else if (key == "n_rows") c.n_rows = v.get<int>();
      else if (key == "canvas_h") c.canvas_h = v.get<int>();
      else if (key == "canvas_w") c.canvas_w = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "variants_per_source") c.variants_per_source = v.get<int>();
      else if (key == "folds") c.folds = v.get<int>();
      else if (key == "test_fold") c.test_fold = v.get<int>();
      else if (key == "workers") c.workers = v.get<int>();
      else if (key == "polarity") {
        const auto p = v.get<std::string>();
        if (p == "dark") c.polarity = Polarity::DarkForeground;
        else if (p == "light") c.polarity = Polarity::LightForeground;
        else throw Error("polarity must be 'dark' or 'light'");
      } else {
        throw Error("unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error("config key '" + key + "': " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  return config_from_json_text(read_text(path));
}

std::string config_to_json_text(const RunConfig& c) {
  const json j = {{"patch_h", c.patch_h},
                  {"patch_w", c.patch_w},
                  {"mask_ratio", c.mask_ratio},
                  {"threshold_t", c.threshold_t},
                  {"prune_ratio", c.prune_ratio},
                  {"n_rows", c.n_rows},
                  {"canvas_h", c.canvas_h},
                  {"canvas_w", c.canvas_w},
                  {"seed", c.seed},
                  {"variants_per_source", c.variants_per_source},
                  {"folds", c.folds},
                  {"test_fold", c.test_fold},
                  {"workers", c.workers},
                  {"polarity", c.polarity == Polarity::DarkForeground ? "dark" : "light"}};
  return j.dump(2);
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  int h = 0;
  int w = 0;
  std::size_t used_h = 0;
  std::size_t used_w = 0;
  try {
    if (x != std::string::npos) {
      h = std::stoi(text.substr(0, x), &used_h);
      w = std::stoi(text.substr(x + 1), &used_w);
    }
  } catch (const std::exception&) {
    h = 0;
  }
  if (x == std::string::npos || used_h != x || used_w != text.size() - x - 1 || h < 1 || w < 1) {
    throw Error("size must look like HxW, got '" + text + "'");
  }
  return {h, w};
}

// ---- manifest ---------------------------------------------------------------

std::string split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unassigned: break;
  }
  return "";
}

Manifest manifest_from_json_text(const std::string& text) {
  const json root = parse_json(text, "manifest");
  const json& list = root.is_object() ? root.at("samples") : root;
  if (!list.is_array()) {
    throw Error("manifest must hold a 'samples' array");
  }
  Manifest m;
  for (const json& s : list) {
    try {
      SampleEntry e;
      e.id = s.at("id").get<std::string>();
      e.image_path = s.at("image_path").get<std::string>();
      e.group_id = s.value("group_id", e.id);
      if (s.contains("split") && !s["split"].is_null()) {
        e.split = parse_split(s["split"].get<std::string>());
      }
      const auto kind = s.value("kind", std::string("real"));
      if (kind == "real") e.kind = SampleKind::Real;
      else if (kind == "synthetic") e.kind = SampleKind::Synthetic;
      else throw Error("unknown kind '" + kind + "'");
      if (s.contains("axis")) {
        std::vector<Point> axis;
        for (const json& p : s["axis"]) {
          axis.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        }
        e.axis = std::move(axis);
      }
      if (s.contains("mask_indices")) e.mask_indices = s["mask_indices"].get<std::vector<int>>();
      if (s.contains("seed")) e.seed = s["seed"].get<std::uint64_t>();
      if (s.contains("fold")) e.fold = s["fold"].get<int>();
      if (s.contains("conditions")) e.conditions = s["conditions"].get<std::vector<int>>();
      if (s.contains("source_path")) e.source_path = s["source_path"].get<std::string>();
      m.samples.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(std::string("bad manifest entry: ") + ex.what());
    }
  }
  return m;
}

std::string manifest_to_json_text(const Manifest& m) {
  json list = json::array();
  for (const SampleEntry& e : m.samples) {
    json s = {{"id", e.id},
              {"image_path", e.image_path},
              {"group_id", e.group_id},
              {"kind", e.kind == SampleKind::Real ? "real" : "synthetic"}};
    if (e.split != Split::Unassigned) s["split"] = split_name(e.split);
    if (e.axis) {
      json axis = json::array();
      for (const Point& p : *e.axis) axis.push_back({p.x, p.y});
      s["axis"] = std::move(axis);
    }
    if (e.mask_indices) s["mask_indices"] = *e.mask_indices;
    if (e.seed) s["seed"] = *e.seed;
    if (e.fold) s["fold"] = *e.fold;
    if (e.conditions) s["conditions"] = *e.conditions;
    if (e.source_path) s["source_path"] = *e.source_path;
    list.push_back(std::move(s));
  }
  return json{{"samples", std::move(list)}}.dump(2);
}

Manifest load_manifest(const fs::path& path) {
  return manifest_from_json_text(read_text(path));
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  write_text(path, manifest_to_json_text(manifest) + "\n");
}

void validate_manifest(const Manifest& m) {
  std::set<std::string> ids;
  std::set<std::string> real_groups;
  for (const SampleEntry& e : m.samples) {
    if (e.id.empty()) {
      throw Error("sample with empty id");
    }
    if (!ids.insert(e.id).second) {
      throw Error("duplicate sample id '" + e.id + "'");
    }
    if (e.group_id.empty()) {
      throw Error("sample '" + e.id + "' has no group id");
    }
    if (e.kind == SampleKind::Real) {
      real_groups.insert(e.group_id);
    }
  }
  for (const SampleEntry& e : m.samples) {
    if (e.kind == SampleKind::Synthetic && !real_groups.contains(e.group_id) &&
        !ids.contains(e.group_id)) {
      throw Error("synthetic sample '" + e.id + "' names unknown source '" + e.group_id + "'");
    }
  }
}

// ---- seeds, folds, workers ---------------------------------------------------

std::uint64_t derive_seed(std::uint64_t run_seed, const std::string& key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char ch : key) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(run_seed) ^ h);
}

std::map<std::string, int> assign_folds(const Manifest& manifest, int folds, std::uint64_t seed) {
  if (folds < 1) {
    throw Error("fold count must be positive");
  }
  std::set<std::string> unique;
  for (const SampleEntry& e : manifest.samples) {
    unique.insert(e.group_id);
  }
  std::vector<std::string> groups(unique.begin(), unique.end());
  std::mt19937_64 rng(derive_seed(seed, "folds"));
  for (std::size_t i = groups.size(); i > 1; --i) {
    std::swap(groups[i - 1], groups[rng() % i]);
  }
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    out[groups[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return out;
}

void apply_folds(Manifest& manifest, const std::map<std::string, int>& folds, int fold_count,
                 int test_fold) {
  if (test_fold < 0 || test_fold >= fold_count) {
    throw Error("test fold out of range");
  }
  const int val_fold = (test_fold + 1) % fold_count;
  for (SampleEntry& e : manifest.samples) {
    const int f = folds.at(e.group_id);
    e.fold = f;
    if (f == test_fold) e.split = Split::Test;
    else if (f == val_fold && fold_count > 1) e.split = Split::Val;
    else e.split = Split::Train;
  }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(run);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  if (first) {
    std::rethrow_exception(first);
  }
}

void save_report(const RunReport& report, const fs::path& path) {
  json failures = json::array();
  for (const SampleFailure& f : report.failures) {
    failures.push_back({{"id", f.id}, {"stage", f.stage}, {"message", f.message}});
  }
  const json j = {{"command", report.command},
                  {"processed", report.processed},
                  {"failed", report.failures.size()},
                  {"failures", failures},
                  {"notes", report.notes}};
  write_text(path, j.dump(2) + "\n");
}

// ---- preprocess ----------------------------------------------------------------

double canvas_scale(double longest_extent, const RunConfig& config) {
  if (longest_extent <= 0.0) {
    throw Error("no chromosome extent to scale");
  }
  return static_cast<double>(config.canvas_h - 2 * config.patch_h) / longest_extent;
}

PreprocessResult cmd_preprocess(const Manifest& manifest, const fs::path& base_dir,
                                const RunConfig& config, const fs::path& out_dir) {
  validate_manifest(manifest);
  if (manifest.samples.empty()) {
    throw Error("empty dataset");
  }
  if (config.canvas_w < config.patch_w || config.canvas_h < 3 * config.patch_h) {
    throw Error("canvas is too small for the patch size");
  }
  fs::create_directories(out_dir);
  const std::size_t n = manifest.samples.size();
  PreprocessResult result;
  result.report.command = "preprocess";
  std::mutex mu;

  // Pass 1: axis extents, for the dataset-level scale.
  std::vector<std::optional<GrayImage>> images(n);
  std::vector<double> extents(n, 0.0);
  AxisOptions axis_opts;
  axis_opts.prune_ratio = config.prune_ratio;
  parallel_for(n, config.workers, [&](std::size_t i) {
    const SampleEntry& e = manifest.samples[i];
    try {
      GrayImage img = load_png(resolve(base_dir, e.image_path));
      const Segmentation seg = segment(img, config.polarity);
      extents[i] = ArcLength(extract_axis(seg.mask, axis_opts)).length() + 1.0;
      images[i] = std::move(img);
    } catch (const std::exception& ex) {
      record(result.report, mu, e.id, "axis", ex);
    }
  });
  const double longest = *std::max_element(extents.begin(), extents.end());
  if (longest <= 0.0) {
    result.report.processed = n;
    sort_failures(result.report, manifest);
    return result;
  }
  result.scale = canvas_scale(longest, config);
  result.report.notes.push_back("canvas scale " + format_number(result.scale));

  // Pass 2: rescale and straighten onto the canvas.
  std::vector<std::optional<SampleEntry>> outputs(n);
  const StraightenOptions opts = straighten_options(config);
  parallel_for(n, config.workers, [&](std::size_t i) {
    if (!images[i]) {
      return;
    }
    const SampleEntry& e = manifest.samples[i];
    try {
      const GrayImage& src = *images[i];
      const int w = std::max(1, static_cast<int>(std::lround(src.width() * result.scale)));
      const int h = std::max(1, static_cast<int>(std::lround(src.height() * result.scale)));
      const GrayImage scaled = resize_bilinear(src, w, h);
      const StraightenResult r = ppa_straighten(scaled, opts);
      if (r.image.height() > config.canvas_h) {
        throw Error("straightened chromosome is taller than the canvas");
      }
      GrayImage canvas(config.canvas_w, config.canvas_h, clamp_to_u8(r.background));
      const int y0 = (config.canvas_h - r.image.height()) / 2;
      for (int y = 0; y < r.image.height(); ++y) {
        for (int x = 0; x < r.image.width(); ++x) {
          canvas(x, y0 + y) = r.image(x, y);
        }
      }
      save_png(canvas, out_dir / (e.id + ".png"));
      SampleEntry out = e;
      out.source_path = fs::absolute(resolve(base_dir, e.image_path)).string();
      out.image_path = e.id + ".png";
      std::vector<Point> axis;
      for (const Point& p : r.output_axis.points) {
        axis.push_back({p.x, p.y + y0});
      }
      out.axis = std::move(axis);
      outputs[i] = std::move(out);
    } catch (const std::exception& ex) {
      record(result.report, mu, e.id, "straighten", ex);
    }
  });
  for (auto& o : outputs) {
    if (o) {
      result.manifest.samples.push_back(std::move(*o));
    }
  }
  result.report.processed = n;
  sort_failures(result.report, manifest);
  return result;
}

// ---- synth -------------------------------------------------------------------------

SynthResult cmd_synth(const Manifest& manifest, const fs::path& base_dir,
                      const RunConfig& config, const fs::path& out_dir) {
  validate_manifest(manifest);
  if (config.variants_per_source < 0) {
    throw Error("variants per source must be non-negative");
  }
  fs::create_directories(out_dir);
  const std::size_t n = manifest.samples.size();
  SynthResult result;
  result.report.command = "synth";
  std::mutex mu;
  std::vector<std::vector<SampleEntry>> variants(n);
  std::vector<bool> skipped(n, false);
  BendOptions bend;
  bend.axis.prune_ratio = config.prune_ratio;
  parallel_for(n, config.workers, [&](std::size_t i) {
    const SampleEntry& e = manifest.samples[i];
    if (e.kind != SampleKind::Real) {
      return;
    }
    try {
      const GrayImage img = load_png(resolve(base_dir, e.image_path));
      const Segmentation seg = segment(img, config.polarity);
      const MedialAxis axis = extract_axis(seg.mask, bend.axis);
      if (axis.size() < 7 || ma_score(axis) < bend.min_source_ma) {
        skipped[i] = true;
        return;
      }
      for (int k = 0; k < config.variants_per_source; ++k) {
        const std::string id = e.id + "_bend" + std::to_string(k);
        const std::uint64_t seed = derive_seed(config.seed, id);
        const GrayImage bent = generate_bent(img, seg.mask, sample_bend_spec(seed), bend);
        save_png(bent, out_dir / (id + ".png"));
        SampleEntry v;
        v.id = id;
        v.image_path = id + ".png";
        v.group_id = e.group_id;
        v.kind = SampleKind::Synthetic;
        v.seed = seed;
        v.source_path = fs::absolute(resolve(base_dir, e.image_path)).string();
        variants[i].push_back(std::move(v));
      }
    } catch (const std::exception& ex) {
      record(result.report, mu, e.id, "synth", ex);
      variants[i].clear();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    SampleEntry e = manifest.samples[i];
    e.image_path = fs::absolute(resolve(base_dir, e.image_path)).string();
    result.manifest.samples.push_back(std::move(e));
    for (SampleEntry& v : variants[i]) {
      result.manifest.samples.push_back(std::move(v));
    }
    if (skipped[i]) {
      result.report.notes.push_back(manifest.samples[i].id + ": not straight, no variants");
    }
  }
  result.report.processed = n;
  sort_failures(result.report, manifest);
  return result;
}

// ---- prepare -----------------------------------------------------------------------

PrepareResult cmd_prepare(const Manifest& manifest, const fs::path& base_dir,
                          const RunConfig& config, const fs::path& out_dir) {
  validate_manifest(manifest);
  if (manifest.samples.empty()) {
    throw Error("empty dataset");
  }
  const PatchGrid grid = split_grid(config.canvas_h, config.canvas_w, config.n_rows);
  Manifest assigned = manifest;
  apply_folds(assigned, assign_folds(assigned, config.folds, config.seed), config.folds,
              config.test_fold);
  fs::create_directories(out_dir);
  const std::size_t n = assigned.samples.size();
  PrepareResult result;
  result.report.command = "prepare";
  std::mutex mu;
  std::vector<std::optional<SampleEntry>> outputs(n);
  parallel_for(n, config.workers, [&](std::size_t i) {
    const SampleEntry& e = assigned.samples[i];
    try {
      if (!e.axis || e.axis->empty()) {
        throw Error("sample has no axis; run preprocess first");
      }
      const GrayImage img = load_png(resolve(base_dir, e.image_path));
      if (img.width() != config.canvas_w || img.height() != config.canvas_h) {
        throw Error("image is " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + ", not on the configured canvas");
      }
      MedialAxis axis;
      axis.points = *e.axis;
      const std::uint64_t seed = derive_seed(config.seed, e.id);
      const MaskSpec spec = sample_mask(grid, config.mask_ratio, seed);
      const Segmentation seg = segment(img, config.polarity);
      const GrayImage masked =
          apply_mask(img, grid, spec, axis, {seg.background_mean, 25.0}, derive_seed(seed, "noise"));
      const ConditionGrid cond = condition_image(seg.mask, grid, config.threshold_t);
      const fs::path dir = out_dir / e.id;
      fs::create_directories(dir);
      save_png(img, dir / "original.png");
      save_png(masked, dir / "masked.png");
      save_png(render_condition(grid, cond), dir / "condition.png");
      SampleEntry out = e;
      out.image_path = e.id + "/original.png";
      out.mask_indices = spec.masked_indices;
      out.seed = seed;
      std::vector<int> labels;
      for (const Condition c : cond.labels) {
        labels.push_back(static_cast<int>(c));
      }
      out.conditions = std::move(labels);
      outputs[i] = std::move(out);
    } catch (const std::exception& ex) {
      record(result.report, mu, e.id, "prepare", ex);
    }
  });
  for (auto& o : outputs) {
    if (o) {
      result.manifest.samples.push_back(std::move(*o));
    }
  }
  save_manifest(result.manifest, out_dir / "manifest.json");
  result.report.processed = n;
  sort_failures(result.report, assigned);
  return result;
}

// ---- evaluate -------------------------------------------------------------------------

std::vector<EvalPair> pairs_from_json_text(const std::string& text) {
  const json root = parse_json(text, "pairs manifest");
  const json& list = root.is_object() ? root.at("pairs") : root;
  if (!list.is_array()) {
    throw Error("pairs manifest must hold a 'pairs' array");
  }
  std::vector<EvalPair> pairs;
  std::set<std::string> ids;
  for (const json& p : list) {
    EvalPair e;
    try {
      e.id = p.at("id").get<std::string>();
      e.method = p.value("method", std::string("default"));
      e.input = p.at("input").get<std::string>();
      e.output = p.at("output").get<std::string>();
      if (p.contains("reference")) e.reference = p["reference"].get<std::string>();
      if (p.contains("lpips")) e.lpips = p["lpips"].get<double>();
    } catch (const json::exception& ex) {
      throw Error(std::string("mismatched pair: ") + ex.what());
    }
    if (!ids.insert(e.id).second) {
      throw Error("duplicate pair id '" + e.id + "'");
    }
    pairs.push_back(std::move(e));
  }
  return pairs;
}

std::vector<EvalPair> load_pairs(const fs::path& path) {
  return pairs_from_json_text(read_text(path));
}

ScoreReport evaluate_pair(const GrayImage& input, const GrayImage& output,
                          const GrayImage* reference, const RunConfig& config) {
  AxisOptions axis_opts;
  axis_opts.prune_ratio = config.prune_ratio;
  const GrayImage& target_img = reference ? *reference : input;
  const Segmentation target_seg = segment(target_img, config.polarity);
  const MedialAxis target_axis = extract_axis(target_seg.mask, axis_opts);
  const Segmentation out_seg = segment(output, config.polarity);
  const MedialAxis out_axis = extract_axis(out_seg.mask, axis_opts);
  ScoreReport s;
  s.l_score = l_score(out_axis, target_axis.size());
  s.ma_score = ma_score(out_axis);
  s.sobel_score = sobel_score(out_seg.mask);
  s.dp_score = dp_score(density_profile(target_img, target_axis),
                        density_profile(output, out_axis));
  return s;
}

std::string scores_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << "id,l_score,ma_score,sobel_score,dp_score,lpips\n";
  for (const EvalRow& r : rows) {
    out << r.id << ',' << format_number(r.scores.l_score) << ','
        << format_number(r.scores.ma_score) << ',' << format_number(r.scores.sobel_score) << ','
        << format_number(r.scores.dp_score) << ','
        << (r.scores.lpips ? format_number(*r.scores.lpips) : "") << '\n';
  }
  return out.str();
}

namespace {

const std::vector<std::string> kMetrics = {"l_score", "ma_score", "sobel_score", "dp_score",
                                           "lpips"};

std::optional<double> metric_value(const ScoreReport& s, const std::string& name) {
  if (name == "l_score") return s.l_score;
  if (name == "ma_score") return s.ma_score;
  if (name == "sobel_score") return s.sobel_score;
  if (name == "dp_score") return s.dp_score;
  if (name == "lpips") return s.lpips;
  throw Error("unknown metric '" + name + "'");
}

std::vector<std::string> methods_in_order(const std::vector<EvalRow>& rows) {
  std::vector<std::string> methods;
  for (const EvalRow& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  return methods;
}

} // namespace

std::map<std::string, std::map<std::string, MetricSummary>> summarize(
    const std::vector<EvalRow>& rows) {
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (const EvalRow& r : rows) {
    for (const std::string& m : kMetrics) {
      if (const auto v = metric_value(r.scores, m)) {
        values[r.method][m].push_back(*v);
      }
    }
  }
  std::map<std::string, std::map<std::string, MetricSummary>> out;
  for (const auto& [method, metrics] : values) {
    for (const auto& [name, v] : metrics) {
      MetricSummary s;
      s.n = v.size();
      s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(s.n);
      double ss = 0.0;
      for (const double x : v) {
        ss += (x - s.mean) * (x - s.mean);
      }
      s.stddev = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
      out[method][name] = s;
    }
  }
  return out;
}

std::string score_plot_svg(const std::vector<EvalRow>& rows, const std::string& metric) {
  const auto methods = methods_in_order(rows);
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const EvalRow& r : rows) {
    if (const auto v = metric_value(r.scores, metric)) {
      lo = any ? std::min(lo, *v) : *v;
      hi = any ? std::max(hi, *v) : *v;
      any = true;
    }
  }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const int col_w = 120;
  const int left = 70;
  const int top = 30;
  const int plot_h = 240;
  const int width = left + col_w * static_cast<int>(std::max<std::size_t>(1, methods.size())) + 20;
  const int height = top + plot_h + 50;
  auto ypos = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\">" << metric
      << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << ypos(v) + 4 << "\" text-anchor=\"end\">"
        << format_number(v) << "</text>\n";
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const double cx = left + col_w * (static_cast<double>(m) + 0.5);
    std::vector<double> v;
    for (const EvalRow& r : rows) {
      if (r.method != methods[m]) continue;
      if (const auto x = metric_value(r.scores, metric)) v.push_back(*x);
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      // Deterministic horizontal spread so overlapping points stay visible.
      const double jitter = (static_cast<double>((i * 37) % 41) / 40.0 - 0.5) * col_w * 0.5;
      svg << "<circle cx=\"" << cx + jitter << "\" cy=\"" << ypos(v[i])
          << "\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
    }
    if (!v.empty()) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      svg << "<line x1=\"" << cx - col_w * 0.35 << "\" x2=\"" << cx + col_w * 0.35 << "\" y1=\""
          << ypos(mean) << "\" y2=\"" << ypos(mean) << "\" stroke=\"crimson\" stroke-width=\"2\"/>\n";
    }
    svg << "<text x=\"" << cx << "\" y=\"" << top + plot_h + 20 << "\" text-anchor=\"middle\">"
        << methods[m] << " (n=" << v.size() << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

EvaluateResult cmd_evaluate(const std::vector<EvalPair>& pairs, const fs::path& base_dir,
                            const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  EvaluateResult result;
  result.report.command = "evaluate";
  std::mutex mu;
  std::vector<std::optional<EvalRow>> rows(pairs.size());
  parallel_for(pairs.size(), config.workers, [&](std::size_t i) {
    const EvalPair& p = pairs[i];
    try {
      const GrayImage input = load_png(resolve(base_dir, p.input));
      const GrayImage output = load_png(resolve(base_dir, p.output));
      std::optional<GrayImage> reference;
      if (p.reference) {
        reference = load_png(resolve(base_dir, *p.reference));
      }
      EvalRow row{p.id, p.method,
                  evaluate_pair(input, output, reference ? &*reference : nullptr, config)};
      row.scores.lpips = p.lpips;
      rows[i] = std::move(row);
    } catch (const std::exception& ex) {
      record(result.report, mu, p.id, "evaluate", ex);
    }
  });
  for (auto& r : rows) {
    if (r) result.rows.push_back(std::move(*r));
  }
  result.report.processed = pairs.size();

  write_text(out_dir / "scores.csv", scores_csv(result.rows));
  const auto summary = summarize(result.rows);
  std::ostringstream csv;
  std::ostringstream md;
  csv << "method,metric,n,mean,std\n";
  md << "| method | n |";
  for (const auto& m : kMetrics) md << ' ' << m << " |";
  md << "\n|---|---|";
  for (std::size_t i = 0; i < kMetrics.size(); ++i) md << "---|";
  md << '\n';
  for (const std::string& method : methods_in_order(result.rows)) {
    const auto& per = summary.at(method);
    md << "| " << method << " | " << per.at("l_score").n << " |";
    for (const auto& m : kMetrics) {
      const auto it = per.find(m);
      if (it == per.end()) {
        md << " - |";
        continue;
      }
      csv << method << ',' << m << ',' << it->second.n << ',' << format_number(it->second.mean)
          << ',' << format_number(it->second.stddev) << '\n';
      md << ' ' << format_number(it->second.mean) << " ± " << format_number(it->second.stddev)
         << " |";
    }
    md << '\n';
  }
  write_text(out_dir / "summary.csv", csv.str());
  write_text(out_dir / "summary.md", md.str());
  for (const auto& m : kMetrics) {
    if (m == "lpips" && std::none_of(result.rows.begin(), result.rows.end(),
                                     [](const EvalRow& r) { return r.scores.lpips.has_value(); })) {
      continue;
    }
    write_text(out_dir / (m + ".svg"), score_plot_svg(result.rows, m));
  }
  return result;
}

} // namespace chromstraight
