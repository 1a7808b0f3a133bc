// chromstraight: batch straightening, synthetic bending, bundle preparation
// and evaluation over JSON manifests.

#include "chromstraight/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace chromstraight;

namespace {

struct Flags {
  std::string input;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> mask_ratio;
  std::string patch_size;
  std::optional<long> threshold_t;
  std::optional<double> prune_ratio;
  std::optional<int> workers;
  bool keep_going = false;
  std::string out;
};

void add_common(CLI::App* cmd, Flags& f, const std::string& input_help) {
  cmd->add_option("manifest", f.input, input_help)->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--mask-ratio", f.mask_ratio, "fraction of grid cells to mask")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--patch-size", f.patch_size, "patch size as HxW, e.g. 8x16");
  cmd->add_option("--threshold-t", f.threshold_t, "Sobel threshold for bent cells");
  cmd->add_option("--prune-ratio", f.prune_ratio, "branch pruning ratio")
      ->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd->add_flag("--keep-going", f.keep_going, "exit 0 even when some samples fail");
  cmd->add_option("--out", f.out, "output directory")->required();
}

RunConfig build_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.mask_ratio) c.mask_ratio = *f.mask_ratio;
  if (!f.patch_size.empty()) {
    const auto [h, w] = parse_size(f.patch_size);
    c.patch_h = h;
    c.patch_w = w;
  }
  if (f.threshold_t) c.threshold_t = *f.threshold_t;
  if (f.prune_ratio) c.prune_ratio = *f.prune_ratio;
  if (f.workers) c.workers = *f.workers;
  return c;
}

int finish(const RunReport& report, const fs::path& out, bool keep_going) {
  save_report(report, out / "report.json");
  std::cout << report.command << ": " << report.processed << " processed, "
            << report.failures.size() << " failed\n";
  for (const auto& note : report.notes) {
    std::cout << "  note: " << note << '\n';
  }
  for (const auto& f : report.failures) {
    std::cerr << "  " << f.id << " [" << f.stage << "]: " << f.message << '\n';
  }
  return report.ok() || keep_going ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chromosome straightening toolkit"};
  app.require_subcommand(1);
  Flags f;
  auto* pre = app.add_subcommand("preprocess", "straighten every sample onto the canvas");
  auto* syn = app.add_subcommand("synth", "add bent variants of straight samples");
  auto* prep = app.add_subcommand("prepare", "write the masked/condition training bundle");
  auto* eval = app.add_subcommand("evaluate", "score straightened outputs against inputs");
  add_common(pre, f, "sample manifest (JSON)");
  add_common(syn, f, "sample manifest (JSON)");
  add_common(prep, f, "preprocessed manifest (JSON)");
  add_common(eval, f, "pairs manifest (JSON)");
  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig config = build_config(f);
    const fs::path out(f.out);
    fs::create_directories(out);
    const fs::path base = fs::path(f.input).parent_path();
    if (pre->parsed()) {
      const auto r = cmd_preprocess(load_manifest(f.input), base, config, out);
      save_manifest(r.manifest, out / "manifest.json");
      return finish(r.report, out, f.keep_going);
    }
    if (syn->parsed()) {
      const auto r = cmd_synth(load_manifest(f.input), base, config, out);
      save_manifest(r.manifest, out / "manifest.json");
      return finish(r.report, out, f.keep_going);
    }
    if (prep->parsed()) {
      const auto r = cmd_prepare(load_manifest(f.input), base, config, out);
      return finish(r.report, out, f.keep_going);
    }
    const auto r = cmd_evaluate(load_pairs(f.input), base, config, out);
    return finish(r.report, out, f.keep_going);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
