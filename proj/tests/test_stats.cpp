#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mrfalsify/stats.hpp"

#include <random>
#include <vector>

using namespace mrf;

TEST_CASE("mann-whitney hand-computed examples") {
  SUBCASE("fully separated samples") {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> y{4, 5, 6};
    const MannWhitneyResult r = mann_whitney_u(x, y);
    CHECK(r.u == 0.0);
    const MannWhitneyResult rev = mann_whitney_u(y, x);
    CHECK(rev.u == 9.0);
    CHECK(r.p == rev.p);
  }
  SUBCASE("a sample against itself") {
    const std::vector<double> x{1, 2, 3, 4};
    const MannWhitneyResult r = mann_whitney_u(x, x);
    CHECK(r.u == 8.0);  // n^2 / 2
    CHECK(r.p > 0.9);
  }
  SUBCASE("unequal sizes") {
    const std::vector<double> x{1, 2};
    const std::vector<double> y{3};
    CHECK(mann_whitney_u(x, y).u == 0.0);
    CHECK(mann_whitney_u(y, x).u == 2.0);
  }
  SUBCASE("all values identical") {
    const std::vector<double> x{5, 5, 5};
    const std::vector<double> y{5, 5};
    const MannWhitneyResult r = mann_whitney_u(x, y);
    CHECK(r.u == 3.0);
    CHECK(r.p == 1.0);
  }
}

TEST_CASE("mann-whitney U halves always sum to n1*n2") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size_dist(1, 40);
  std::uniform_int_distribution<int> value_dist(0, 8);  // small range forces ties
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(static_cast<size_t>(size_dist(rng)));
    std::vector<double> y(static_cast<size_t>(size_dist(rng)));
    for (double& v : x) v = value_dist(rng);
    for (double& v : y) v = value_dist(rng);
    const double ux = mann_whitney_u(x, y).u;
    const double uy = mann_whitney_u(y, x).u;
    CHECK(ux + uy == doctest::Approx(static_cast<double>(x.size() * y.size())).epsilon(1e-12));
  }
}

TEST_CASE("mann-whitney flags clearly different distributions") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> lo(0.0, 1.0);
  std::normal_distribution<double> hi(2.0, 1.0);
  std::vector<double> x(300), y(300);
  for (double& v : x) v = lo(rng);
  for (double& v : y) v = hi(rng);
  const MannWhitneyResult r = mann_whitney_u(x, y);
  CHECK(r.p < 1e-10);
  CHECK(r.p > 0.0);
}

TEST_CASE("r-squared trivial cases") {
  SUBCASE("perfectly collinear points give exactly one") {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{0, 1, 2, 3};
    CHECK(r_squared_below_threshold(x, y, 10.0) == 1.0);
  }
  SUBCASE("constant response gives exactly zero") {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{5, 5, 5, 5};
    CHECK(r_squared_below_threshold(x, y, 10.0) == 0.0);
  }
  SUBCASE("symmetric tent gives zero slope and zero R2") {
    const std::vector<double> x{0, 1, 2};
    const std::vector<double> y{0, 1, 0};
    CHECK(*r_squared_below_threshold(x, y, 10.0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("too few points below the threshold is undefined") {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{0, 1, 2, 3};
    CHECK_FALSE(r_squared_below_threshold(x, y, 1.5).has_value());
  }
  SUBCASE("zero predictor variance is undefined") {
    const std::vector<double> x{1, 1, 1, 1};
    const std::vector<double> y{0, 1, 2, 3};
    CHECK_FALSE(r_squared_below_threshold(x, y, 10.0).has_value());
  }
}

TEST_CASE("r-squared only sees points below the threshold") {
  // Collinear below the threshold, wild above it.
  const std::vector<double> x{0.0, 0.1, 0.2, 0.3, 5.0, 6.0};
  const std::vector<double> y{0.0, 0.2, 0.4, 0.6, 100.0, -50.0};
  CHECK(*r_squared_below_threshold(x, y, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("r-squared is invariant under affine rescaling of the predictor") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(100), y(100);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = dist(rng);
    y[i] = 0.7 * x[i] + 0.2 * dist(rng);
  }
  std::vector<double> x_scaled(x.size());
  for (size_t i = 0; i < x.size(); ++i) x_scaled[i] = 3.5 * x[i] - 1.25;
  const double r1 = *r_squared_below_threshold(x, y, 2.0);
  const double r2 = *r_squared_below_threshold(x_scaled, y, 7.0);  // same points survive
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
  CHECK(r1 > 0.0);
  CHECK(r1 < 1.0);
}

TEST_CASE("histograms cover every sample") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> dist(-3.0, 7.0);
  std::vector<double> v(500);
  for (double& x : v) x = dist(rng);
  const Histogram h = make_histogram(v, 30);
  long total = 0;
  for (long c : h.counts) total += c;
  CHECK(total == 500);
  CHECK(h.lo <= h.hi);

  SUBCASE("single value occupies one bin") {
    const std::vector<double> one{1.25};
    const Histogram hs = make_histogram(one, 30);
    long occupied = 0, sum = 0;
    for (long c : hs.counts) {
      occupied += c > 0 ? 1 : 0;
      sum += c;
    }
    CHECK(occupied == 1);
    CHECK(sum == 1);
  }

  SUBCASE("clipping counts overflow in the right-most bin") {
    const std::vector<double> vals{0.0, 0.1, 0.2, 0.85, 50.0, 60.0};
    const Histogram hc = make_histogram(vals, 10, 1.0);
    CHECK(hc.hi == 1.0);
    CHECK(hc.counts.back() == 2);  // only the two clipped values overflow
    long total_c = 0;
    for (long c : hc.counts) total_c += c;
    CHECK(total_c == 6);
  }
}

TEST_CASE("summarize assembles the full report") {
  const std::vector<double> f{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> eps{0.05, 0.1, 0.2, 0.3};
  const std::vector<double> mu{0.1, 0.15, 0.3, 0.5};
  const SummaryReport rep = summarize(f, eps, mu, 0.15);
  CHECK(rep.count == 4);
  CHECK(rep.fitness.mean == doctest::Approx(0.25));
  CHECK(rep.trivial_failures == 2);  // 0.2 and 0.3 reach the threshold
  CHECK_FALSE(rep.r_squared.has_value());  // only two points below threshold

  SUBCASE("a single evaluation still yields a report") {
    const std::vector<double> single{0.1};
    const SummaryReport one = summarize(single, single, single, 0.15);
    CHECK(one.count == 1);
    long occupied = 0;
    for (long c : one.fitness.histogram.counts) occupied += c > 0 ? 1 : 0;
    CHECK(occupied == 1);
  }
}
