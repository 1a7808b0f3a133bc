#pragma once

#include "chromstraight/image.hpp"
#include "chromstraight/metrics.hpp"
#include "chromstraight/segmentation.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chromstraight {

struct RunConfig {
  int patch_h = 8;
  int patch_w = 16;
  double mask_ratio = 0.70;
  long threshold_t = 18;
  double prune_ratio = 0.1;
  int n_rows = 16;
  int canvas_h = 128;
  int canvas_w = 32;
  std::uint64_t seed = 0;
  int variants_per_source = 5;
  int folds = 5;
  int test_fold = 0;
  int workers = 0;  // 0 = hardware concurrency
  Polarity polarity = Polarity::DarkForeground;
};

/// Reads a JSON object whose keys mirror RunConfig. Missing keys keep their
/// defaults; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);

/// Parses "HxW" (e.g. "8x16").
std::pair<int, int> parse_size(const std::string& text);

enum class Split { Train, Val, Test, Unassigned };
enum class SampleKind { Real, Synthetic };

struct SampleEntry {
  std::string id;
  std::string image_path;  // relative to the manifest's directory unless absolute
  Split split = Split::Unassigned;
  std::string group_id;
  SampleKind kind = SampleKind::Real;
  std::optional<std::vector<Point>> axis;
  std::optional<std::vector<int>> mask_indices;
  std::optional<std::uint64_t> seed;
  std::optional<int> fold;
  std::optional<std::vector<int>> conditions;  // per-cell labels, 0/1/2
  std::optional<std::string> source_path;
};

struct Manifest {
  std::vector<SampleEntry> samples;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest manifest_from_json_text(const std::string& text);
std::string manifest_to_json_text(const Manifest& manifest);

/// Throws unless ids are unique, every sample has a group id and every
/// synthetic sample's group names a real sample.
void validate_manifest(const Manifest& manifest);

std::string split_name(Split split);

/// Stream seed for one sample, independent of processing order.
std::uint64_t derive_seed(std::uint64_t run_seed, const std::string& key);

/// Group id -> fold in [0, folds). Groups are shuffled with the run seed and
/// dealt round-robin, so fold sizes differ by at most one group.
std::map<std::string, int> assign_folds(const Manifest& manifest, int folds,
                                        std::uint64_t seed);

/// Sets fold and split for every sample: the test fold is `test_fold`, the
/// validation fold the one after it, the rest train.
void apply_folds(Manifest& manifest, const std::map<std::string, int>& folds,
                 int fold_count, int test_fold);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions escape
/// only after every index has been attempted; the first one is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct SampleFailure {
  std::string id;
  std::string stage;
  std::string message;
};

struct RunReport {
  std::string command;
  std::size_t processed = 0;
  std::vector<SampleFailure> failures;
  std::vector<std::string> notes;

  bool ok() const { return failures.empty(); }
};

void save_report(const RunReport& report, const std::filesystem::path& path);

/// One dataset-level factor that makes the longest chromosome (plus one
/// patch of margin) fill the canvas height.
double canvas_scale(double longest_extent, const RunConfig& config);

struct PreprocessResult {
  Manifest manifest;
  RunReport report;
  double scale = 1.0;
};

/// Straightens every sample with PPA onto a canvas_h x canvas_w canvas and
/// writes `<out>/<id>.png`. The returned manifest points at the outputs and
/// carries each output axis.
PreprocessResult cmd_preprocess(const Manifest& manifest,
                                const std::filesystem::path& base_dir,
                                const RunConfig& config,
                                const std::filesystem::path& out_dir);

struct SynthResult {
  Manifest manifest;
  RunReport report;
};

/// Adds variants_per_source bent variants of every straight real sample,
/// written to `<out>/<id>_bend<k>.png`. Non-straight sources are noted and
/// skipped.
SynthResult cmd_synth(const Manifest& manifest, const std::filesystem::path& base_dir,
                      const RunConfig& config, const std::filesystem::path& out_dir);

struct PrepareResult {
  Manifest manifest;
  RunReport report;
};

/// Writes `<out>/<id>/{original,masked,condition}.png` and
/// `<out>/manifest.json` for preprocessed samples.
PrepareResult cmd_prepare(const Manifest& manifest, const std::filesystem::path& base_dir,
                          const RunConfig& config, const std::filesystem::path& out_dir);

struct EvalPair {
  std::string id;
  std::string method;
  std::string input;
  std::string output;
  std::optional<std::string> reference;
  std::optional<double> lpips;
};

std::vector<EvalPair> load_pairs(const std::filesystem::path& path);
std::vector<EvalPair> pairs_from_json_text(const std::string& text);

struct EvalRow {
  std::string id;
  std::string method;
  ScoreReport scores;
};

/// Scores one pair: L against the reference (or input) axis length, MA and
/// Sobel on the output, DP between reference (or input) and output profiles.
ScoreReport evaluate_pair(const GrayImage& input, const GrayImage& output,
                          const GrayImage* reference, const RunConfig& config);

struct EvaluateResult {
  std::vector<EvalRow> rows;
  RunReport report;
};

/// Writes scores.csv, summary.csv, summary.md and one SVG per metric.
EvaluateResult cmd_evaluate(const std::vector<EvalPair>& pairs,
                            const std::filesystem::path& base_dir,
                            const RunConfig& config, const std::filesystem::path& out_dir);

std::string scores_csv(const std::vector<EvalRow>& rows);

struct MetricSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// method -> metric name -> summary, over rows that have the metric.
std::map<std::string, std::map<std::string, MetricSummary>> summarize(
    const std::vector<EvalRow>& rows);

/// Strip plot of one metric, one column of points per method.
std::string score_plot_svg(const std::vector<EvalRow>& rows, const std::string& metric);

} // namespace chromstraight
