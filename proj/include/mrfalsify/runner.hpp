#pragma once

#include "mrfalsify/config.hpp"
#include "mrfalsify/search.hpp"
#include "mrfalsify/stats.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mrf {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one search or baseline and writes archive.jsonl, evals.csv,
/// generations.csv (search only), report.json and manifest.json into
/// out_dir (created if missing). baseline_count defaults to the search's
/// worst-case budget, generations * offspring.
SearchResult run_and_write(const RunConfig& cfg, bool baseline,
                           const std::filesystem::path& out_dir,
                           std::optional<int> baseline_count = std::nullopt);

/// Mean and stddev of the per-seed archive means, "0.156±0.008" style.
struct SeedsSummary {
  std::vector<std::uint64_t> seeds;
  double mean_control_error{0}, stddev_control_error{0};
  double mean_mr_falsification{0}, stddev_mr_falsification{0};
};
SeedsSummary run_seed_sweep(const RunConfig& cfg, bool baseline, std::uint64_t seed_from,
                            std::uint64_t seed_to, const std::filesystem::path& out_dir,
                            std::optional<int> baseline_count = std::nullopt);

struct TuneCell {
  double b{0};
  double c{0};
  double mean_control_error{0};
  double mean_mr_falsification{0};
};

struct TuneSelection {
  int index{-1};
  bool fallback{false};
};

/// Grid values: b in {1.5, e, 10}; c chosen so that c * error_threshold
/// covers {0.5, 1, 5}.
std::vector<double> tune_b_values();
std::vector<double> tune_c_values(double error_threshold);

/// Picks the cell with the highest mean MR-falsification among cells whose
/// mean control error is below but close to the threshold (within
/// near_fraction of it). When no cell qualifies, falls back to the cell
/// whose mean control error is closest to the threshold.
TuneSelection select_tune_cell(const std::vector<TuneCell>& cells, double error_threshold,
                               double near_fraction = 0.7);

struct TuneReport {
  std::vector<TuneCell> cells;  // row-major: one row per c, one column per b
  TuneSelection selection;
};

/// Runs the 3x3 coefficient grid and reports archive means per cell.
TuneReport run_tune(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct EvalSet {
  std::vector<double> fitness;
  std::vector<double> control_error;
  std::vector<double> mr_falsification;
  std::vector<std::string> programs;
};
EvalSet load_evals_csv(const std::filesystem::path& path);

/// One file: summary report. Two files: summaries plus Mann-Whitney
/// comparisons of fitness, MR-falsification and control error. clip_hi
/// folds metric values above it into the right-most histogram bin.
nlohmann::json analyze_files(const std::vector<std::filesystem::path>& paths,
                             double error_threshold, int bins = 30,
                             std::optional<double> clip_hi = std::nullopt);

/// Re-realizes archive entry `index`, re-executes it, dumps the input,
/// expected and actual traces as CSV and verifies the stored metrics.
/// Returns 0 on success, 2 on mismatch beyond 1e-9.
int run_replay(const RunConfig& cfg, const std::filesystem::path& archive_path, int index,
               const std::filesystem::path& out_dir);

}  // namespace mrf
