#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mrfalsify/fitness.hpp"

#include <cmath>

using namespace mrf;

namespace {

ProgramSpace space_2d() {
  ProgramSpace s;
  s.n_dim = 2;
  s.dt = 0.02;
  s.k_max = 500;
  s.b_amp = Eigen::Vector2d(0.2, 0.2);
  s.pattern_time_limit = 7.0;
  s.max_shift_samples = 125;
  return s;
}

SutSpec spec_2d() {
  SutSpec s;
  s.dt = 0.02;
  s.warm_up = 3.0;
  s.range = {Eigen::Vector2d(-2.0, -2.0), Eigen::Vector2d(2.0, 2.0)};
  return s;
}

Node trc(double t1, double t2, double t3, double t4, PatternKind kind, int dims) {
  Node n;
  n.kind = NodeKind::kTraceTerm;
  for (int i = 0; i < dims; ++i) {
    n.pattern.dims.push_back(DimPattern{kind, t1, t2, t3, t4, 0.2});
  }
  return n;
}

Node sp(Node l, Node r) {
  Node n;
  n.kind = NodeKind::kSuperimpose;
  n.children.push_back(std::move(l));
  n.children.push_back(std::move(r));
  return n;
}

}  // namespace

TEST_CASE("fitness identities") {
  const FitnessConfig cfg{std::exp(1.0), 6.66, 0.15};
  SUBCASE("at the threshold the penalty vanishes") {
    CHECK(fitness_value(0.2, 0.15, cfg) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(fitness_value(1.7, 0.15, cfg) == doctest::Approx(1.7).epsilon(1e-12));
  }
  SUBCASE("one over-threshold unit of c divides by b") {
    const double eps = cfg.error_threshold + 1.0 / cfg.c;
    CHECK(fitness_value(0.2, eps, cfg) == doctest::Approx(0.2 / cfg.b).epsilon(1e-12));
  }
  SUBCASE("worked coefficient example") {
    // b = e, c = 6.66, threshold 0.15: an error of 0.30 divides 0.2 by e^0.999.
    const double f = fitness_value(0.2, 0.30, cfg);
    CHECK(f == doctest::Approx(0.2 / std::exp(6.66 * 0.15)).epsilon(1e-12));
    CHECK(f == doctest::Approx(0.0736).epsilon(1e-3));
  }
  SUBCASE("zero falsification always scores zero") {
    for (double eps : {0.0, 0.1, 0.15, 5.0}) CHECK(fitness_value(0.0, eps, cfg) == 0.0);
  }
  SUBCASE("linear in the falsification degree") {
    CHECK(fitness_value(0.4, 0.09, cfg) ==
          doctest::Approx(2.0 * fitness_value(0.2, 0.09, cfg)).epsilon(1e-12));
  }
}

TEST_CASE("fitness is monotone in both arguments") {
  const FitnessConfig cfg{1.5, 3.0, 0.5};
  Rng rng(3);
  std::uniform_real_distribution<double> mu_dist(0.0, 10.0);
  std::uniform_real_distribution<double> eps_dist(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double mu = mu_dist(rng);
    const double eps = eps_dist(rng);
    const double d_mu = mu_dist(rng) + 1e-9;
    const double d_eps = eps_dist(rng) + 1e-9;
    CHECK(fitness_value(mu + d_mu, eps, cfg) > fitness_value(mu, eps, cfg));
    CHECK(fitness_value(mu, eps + d_eps, cfg) < fitness_value(mu, eps, cfg) * (1 + 1e-15));
  }
}

TEST_CASE("fitness config validation") {
  CHECK_THROWS_AS((FitnessConfig{1.0, 1.0, 0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FitnessConfig{2.0, 0.0, 0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FitnessConfig{2.0, 1.0, 0.0}.validate()), std::invalid_argument);
  FitnessConfig ok{2.0, 1.0, 0.1};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("assess on the linear plant yields negligible falsification") {
  const ProgramSpace space = space_2d();
  auto sut = make_lti2(Lti2Params{}, spec_2d(), 2);
  const FitnessConfig cfg{std::exp(1.0), 6.66, 0.15};
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    const Program p = generate_random(space, rng);
    ExecutionCache cache;
    const EvalResult r = assess(p, *sut, cache, cfg, space);
    REQUIRE_FALSE(r.diverged);
    CHECK(r.mr_falsification < 1e-6);
  }
}

TEST_CASE("execution accounting per assessment") {
  const ProgramSpace space = space_2d();
  auto sut = make_lti2(Lti2Params{}, spec_2d(), 2);
  const FitnessConfig cfg{std::exp(1.0), 6.66, 0.15};

  SUBCASE("three distinct terminals cost four executions") {
    const Program p(sp(sp(trc(0.5, 1.5, 2.5, 3.5, PatternKind::kRampHold, 2),
                          trc(0.6, 1.6, 2.6, 3.6, PatternKind::kTriangle, 2)),
                       trc(0.7, 1.7, 2.7, 3.7, PatternKind::kTrapezoid, 2)));
    ExecutionCache cache;
    const EvalResult r = assess(p, *sut, cache, cfg, space);
    CHECK(r.executions_used == 4);
    CHECK(cache.executions() == 3);
  }

  SUBCASE("a terminal appearing twice is executed once") {
    const Node t = trc(0.5, 1.5, 2.5, 3.5, PatternKind::kRampHold, 2);
    const Program p(sp(t, t));
    ExecutionCache cache;
    const EvalResult r = assess(p, *sut, cache, cfg, space);
    CHECK(r.executions_used == 2);
    CHECK(cache.executions() == 1);
    // (G[t] + G[t]) / 2 equals G[t]: the expected output is exact here.
    CHECK(r.mr_falsification == 0.0);
  }

  SUBCASE("random programs use distinct terminals plus one") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
      const Program p = generate_random(space, rng);
      const Realization real = realize(p, sut->range(), space);
      std::vector<Trace> uniq;
      for (const Trace& t : real.terminal_inputs) {
        bool seen = false;
        for (const Trace& u : uniq) seen = seen || u == t;
        if (!seen) uniq.push_back(t);
      }
      ExecutionCache cache;
      const EvalResult r = assess(p, *sut, cache, cfg, space);
      CHECK(r.executions_used == static_cast<int>(uniq.size()) + 1);
    }
  }
}

TEST_CASE("diverged executions score zero with the flag set") {
  const ProgramSpace space = space_2d();
  Lti2Params unstable;
  unstable.pid.kp = 1e7;
  unstable.pid.kd = 0.0;
  auto sut = make_lti2(unstable, spec_2d(), 2);
  const FitnessConfig cfg{std::exp(1.0), 6.66, 0.15};
  Rng rng(13);
  const Program p = generate_random(space, rng);
  ExecutionCache cache;
  const EvalResult r = assess(p, *sut, cache, cfg, space);
  CHECK(r.diverged);
  CHECK(r.fitness == 0.0);
}

TEST_CASE("fitness depends only on the realized traces") {
  // Swapping the operands of a superimposition realizes the same input, so
  // the whole evaluation is identical.
  const ProgramSpace space = space_2d();
  auto sut = make_sat2(Sat2Params{}, spec_2d(), 2);
  const FitnessConfig cfg{std::exp(1.0), 6.66, 0.15};
  const Node a = trc(0.5, 1.5, 2.5, 3.5, PatternKind::kRampHold, 2);
  const Node b = trc(0.2, 1.0, 2.0, 3.0, PatternKind::kTriangle, 2);
  const Program p1(sp(a, b));
  const Program p2(sp(b, a));
  ExecutionCache c1, c2;
  const EvalResult r1 = assess(p1, *sut, c1, cfg, space);
  const EvalResult r2 = assess(p2, *sut, c2, cfg, space);
  CHECK(*r1.input == *r2.input);
  CHECK(r1.control_error == r2.control_error);
  CHECK(r1.mr_falsification == r2.mr_falsification);
  CHECK(r1.fitness == r2.fitness);
}
