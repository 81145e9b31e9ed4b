#pragma once

#include <optional>
#include <span>
#include <vector>

namespace mrf {

struct MannWhitneyResult {
  double u;  // from the first sample's perspective: pairs where x ranks above y
  double p;  // two-sided
};

/// Rank-sum U with mid-rank tie handling. The two-sided p-value uses the
/// normal approximation with tie-corrected variance and continuity
/// correction (adequate here: compared samples are always 200+). When every
/// value is identical across both samples, U = n1*n2/2 and p = 1. p is
/// floored at the smallest positive double rather than reported as 0.
MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y);

/// R-squared of an ordinary least squares fit of y on x restricted to
/// points with x < threshold. Absent with fewer than 3 such points or zero
/// x variance; zero y variance yields 0.
std::optional<double> r_squared_below_threshold(std::span<const double> x,
                                                std::span<const double> y, double threshold);

struct Histogram {
  double lo{0};
  double hi{0};
  std::vector<long> counts;
};

/// Fixed-width bins over [min, max]; the top edge lands in the last bin.
/// With clip_hi set, values above it are counted in the right-most bin.
Histogram make_histogram(std::span<const double> values, int bins,
                         std::optional<double> clip_hi = std::nullopt);

struct MetricSummary {
  double mean{0};
  Histogram histogram;
};

struct SummaryReport {
  long count{0};
  MetricSummary fitness;
  MetricSummary control_error;
  MetricSummary mr_falsification;
  long trivial_failures{0};  // evaluations with control error >= threshold
  std::optional<double> r_squared;
  std::optional<Histogram> archive_distances;
};

/// Histograms, means, trivial-failure counts and the below-threshold
/// R-squared of mr_falsification against control_error.
SummaryReport summarize(std::span<const double> fitness, std::span<const double> control_error,
                        std::span<const double> mr_falsification, double error_threshold,
                        int bins = 30, std::optional<double> clip_hi = std::nullopt);

}  // namespace mrf
