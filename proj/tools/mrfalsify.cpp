#include "mrfalsify/runner.hpp"
#include "mrfalsify/util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string seeds_range;
  double budget_scale = 1.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_budget = true) {
  cmd->add_option("--config", opts.config_path, "run configuration file (JSON, // comments ok)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "RNG seed override")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_option("--seeds", opts.seeds_range, "seed range A..B, runs one sweep per seed");
  if (with_budget) {
    cmd->add_option("--budget-scale", opts.budget_scale,
                    "multiplies generations and offspring for desk-scale runs");
  }
}

mrf::RunConfig resolve_config(const CommonOpts& opts, const std::string& fallback_plant) {
  mrf::RunConfig cfg = opts.config_path.empty() ? mrf::default_config(fallback_plant)
                                                : mrf::load_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.budget_scale != 1.0) cfg = mrf::apply_budget_scale(cfg, opts.budget_scale);
  return cfg;
}

bool parse_seed_range(const std::string& text, std::uint64_t& from, std::uint64_t& to) {
  const size_t pos = text.find("..");
  if (pos == std::string::npos) return false;
  try {
    from = std::stoull(text.substr(0, pos));
    to = std::stoull(text.substr(pos + 2));
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

int run_mode(const CommonOpts& opts, bool baseline, std::optional<int> count) {
  const mrf::RunConfig cfg = resolve_config(opts, "sat2");
  if (!opts.seeds_range.empty()) {
    std::uint64_t from = 0, to = 0;
    if (!parse_seed_range(opts.seeds_range, from, to) || to < from) {
      std::cerr << "error: --seeds expects a range A..B\n";
      return 1;
    }
    const mrf::SeedsSummary s = mrf::run_seed_sweep(cfg, baseline, from, to, cfg.out_dir, count);
    std::printf("seeds %llu..%llu: control_error = %.4g±%.2g, mr_falsification = %.4g±%.2g\n",
                static_cast<unsigned long long>(from), static_cast<unsigned long long>(to),
                s.mean_control_error, s.stddev_control_error, s.mean_mr_falsification,
                s.stddev_mr_falsification);
    return 0;
  }
  const mrf::SearchResult result = mrf::run_and_write(cfg, baseline, cfg.out_dir, count);
  std::printf("%s done: %zu evaluations, %lld executions, archive size %zu, best fitness %s\n",
              baseline ? "baseline" : "search", result.evals.size(), result.total_executions,
              result.archive.members().size(), mrf::format_double(result.archive.best_fitness()).c_str());
  std::printf("outputs written to %s\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-based falsification of linearity design assumptions in control loops"};
  app.set_version_flag("--version", mrf::kToolVersion);
  app.require_subcommand(1);

  CommonOpts search_opts, baseline_opts, tune_opts, replay_opts;
  int baseline_count = -1;

  CLI::App* search_cmd = app.add_subcommand("search", "run the evolutionary search");
  add_common(search_cmd, search_opts);

  CLI::App* baseline_cmd = app.add_subcommand("baseline", "run the random-generation baseline");
  add_common(baseline_cmd, baseline_opts);
  baseline_cmd->add_option("--count", baseline_count,
                           "number of random programs (default: generations * offspring)");

  CLI::App* tune_cmd = app.add_subcommand("tune", "run the 3x3 fitness-coefficient grid");
  add_common(tune_cmd, tune_opts);

  std::vector<std::string> analyze_inputs;
  std::string analyze_out;
  double analyze_threshold = -1.0;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "summarize / compare evals.csv files");
  analyze_cmd->add_option("inputs", analyze_inputs, "one or two evals.csv files")
      ->required()
      ->expected(1, 2);
  analyze_cmd->add_option("--out", analyze_out, "output directory for report.json");
  analyze_cmd->add_option("--error-threshold", analyze_threshold,
                          "control error threshold (default: from --config or 0.15)");
  double analyze_clip = 0.0;
  analyze_cmd->add_option("--clip", analyze_clip,
                          "fold metric values above this into the last histogram bin");
  std::string analyze_config;
  analyze_cmd->add_option("--config", analyze_config, "config supplying the error threshold");

  CLI::App* replay_cmd = app.add_subcommand("replay", "re-execute an archive entry and verify it");
  add_common(replay_cmd, replay_opts, false);
  std::string replay_archive;
  int replay_index = 0;
  replay_cmd->add_option("--archive", replay_archive, "archive.jsonl produced by a run")->required();
  replay_cmd->add_option("--index", replay_index, "entry index, 0-based");

  CLI11_PARSE(app, argc, argv);

  try {
    if (search_cmd->parsed()) return run_mode(search_opts, false, std::nullopt);
    if (baseline_cmd->parsed()) {
      return run_mode(baseline_opts, true,
                      baseline_count > 0 ? std::optional<int>(baseline_count) : std::nullopt);
    }
    if (tune_cmd->parsed()) {
      const mrf::RunConfig cfg = resolve_config(tune_opts, "sat2");
      const mrf::TuneReport report = mrf::run_tune(cfg, cfg.out_dir);
      std::printf("%10s %10s %12s %12s %s\n", "b", "c", "ctrl_err", "mr_falsify", "");
      for (int i = 0; i < static_cast<int>(report.cells.size()); ++i) {
        const mrf::TuneCell& cell = report.cells[static_cast<size_t>(i)];
        std::printf("%10.4g %10.4g %12.4g %12.4g %s\n", cell.b, cell.c, cell.mean_control_error,
                    cell.mean_mr_falsification,
                    i == report.selection.index ? (report.selection.fallback ? "<== (fallback)" : "<==")
                                                : "");
      }
      return 0;
    }
    if (analyze_cmd->parsed()) {
      double threshold = analyze_threshold;
      if (threshold <= 0.0) {
        threshold = analyze_config.empty() ? 0.15
                                           : mrf::load_config(analyze_config).fitness.error_threshold;
      }
      std::vector<std::filesystem::path> paths(analyze_inputs.begin(), analyze_inputs.end());
      const nlohmann::json report = mrf::analyze_files(
          paths, threshold, 30,
          analyze_clip > 0.0 ? std::optional<double>(analyze_clip) : std::nullopt);
      if (!analyze_out.empty()) {
        fs::create_directories(analyze_out);
        std::ofstream os(fs::path(analyze_out) / "report.json");
        os << report.dump(2) << '\n';
      }
      std::cout << report.dump(2) << '\n';
      return 0;
    }
    if (replay_cmd->parsed()) {
      const mrf::RunConfig cfg = resolve_config(replay_opts, "sat2");
      const std::string out = replay_opts.out_dir.empty() ? "replay_out" : replay_opts.out_dir;
      const int rc = mrf::run_replay(cfg, replay_archive, replay_index, out);
      if (rc == 0) std::printf("replay verified, traces written to %s\n", out.c_str());
      return rc;
    }
  } catch (const mrf::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
