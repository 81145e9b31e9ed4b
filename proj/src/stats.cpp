#include "mrfalsify/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mrf {

MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");
  }
  const auto n1 = static_cast<double>(x.size());
  const auto n2 = static_cast<double>(y.size());
  const double n = n1 + n2;

  std::vector<std::pair<double, int>> combined;
  combined.reserve(x.size() + y.size());
  for (double v : x) combined.emplace_back(v, 0);
  for (double v : y) combined.emplace_back(v, 1);
  std::sort(combined.begin(), combined.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum_x = 0.0;
  double tie_term = 0.0;
  for (size_t i = 0; i < combined.size();) {
    size_t j = i;
    while (j < combined.size() && combined[j].first == combined[i].first) ++j;
    // Mid-rank of the tie group spanning 1-based ranks [i+1, j].
    const double mid_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    long in_x = 0;
    for (size_t k = i; k < j; ++k) in_x += combined[k].second == 0 ? 1 : 0;
    rank_sum_x += mid_rank * static_cast<double>(in_x);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const double u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) return {mean, 1.0};

  double z = u - mean;
  z -= std::clamp(z, -0.5, 0.5);  // continuity correction toward the mean
  const double p = std::erfc(std::abs(z) / (std::sqrt(2.0) * std::sqrt(variance)));
  return {u, std::clamp(p, std::numeric_limits<double>::min(), 1.0)};
}

std::optional<double> r_squared_below_threshold(std::span<const double> x,
                                                std::span<const double> y, double threshold) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("r_squared_below_threshold: samples must be parallel");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < threshold) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 3) return std::nullopt;

  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  if (syy == 0.0) return 0.0;

  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    ss_res += r * r;
  }
  return std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
}

Histogram make_histogram(std::span<const double> values, int bins,
                         std::optional<double> clip_hi) {
  if (bins < 1) throw std::invalid_argument("make_histogram: bins must be at least 1");
  Histogram h;
  h.counts.assign(static_cast<size_t>(bins), 0);
  if (values.empty()) return h;

  double lo = values[0];
  double hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (clip_hi) hi = std::min(hi, *clip_hi);
  h.lo = lo;
  h.hi = hi;
  if (hi <= lo) {  // degenerate: a single distinct value
    h.counts[0] = static_cast<long>(values.size());
    return h;
  }
  const double width = (hi - lo) / bins;
  for (double v : values) {
    auto idx = static_cast<long>((v - lo) / width);
    idx = std::clamp(idx, 0L, static_cast<long>(bins) - 1);  // top edge and clip overflow
    ++h.counts[static_cast<size_t>(idx)];
  }
  return h;
}

SummaryReport summarize(std::span<const double> fitness, std::span<const double> control_error,
                        std::span<const double> mr_falsification, double error_threshold,
                        int bins, std::optional<double> clip_hi) {
  if (fitness.empty() || fitness.size() != control_error.size() ||
      fitness.size() != mr_falsification.size()) {
    throw std::invalid_argument("summarize: metric columns must be non-empty and parallel");
  }
  auto mean = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  SummaryReport rep;
  rep.count = static_cast<long>(fitness.size());
  rep.fitness = {mean(fitness), make_histogram(fitness, bins, clip_hi)};
  rep.control_error = {mean(control_error), make_histogram(control_error, bins, clip_hi)};
  rep.mr_falsification = {mean(mr_falsification), make_histogram(mr_falsification, bins, clip_hi)};
  for (double e : control_error) {
    if (e >= error_threshold) ++rep.trivial_failures;
  }
  rep.r_squared = r_squared_below_threshold(control_error, mr_falsification, error_threshold);
  return rep;
}

}  // namespace mrf
