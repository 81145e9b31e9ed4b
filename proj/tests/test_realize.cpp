#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mrfalsify/realize.hpp"

using namespace mrf;

namespace {

ProgramSpace test_space(Eigen::Index n_dim = 1, double b_amp = 0.2) {
  ProgramSpace s;
  s.n_dim = n_dim;
  s.dt = 0.02;
  s.k_max = 250;
  s.b_amp = Eigen::VectorXd::Constant(n_dim, b_amp);
  s.pattern_time_limit = 4.0;
  s.max_shift_samples = 62;
  return s;
}

AmplitudeRange sym_range(Eigen::Index n_dim, double hw) {
  return {Eigen::VectorXd::Constant(n_dim, -hw), Eigen::VectorXd::Constant(n_dim, hw)};
}

Node trc(double t1 = 0.5, double t2 = 1.5, double t3 = 2.5, double t4 = 3.5,
         PatternKind kind = PatternKind::kRampHold, double amp = 0.2) {
  Node n;
  n.kind = NodeKind::kTraceTerm;
  n.pattern.dims.push_back(DimPattern{kind, t1, t2, t3, t4, amp});
  return n;
}

Node as(double a, Node child) {
  Node n;
  n.kind = NodeKind::kScaleBy;
  Node alpha;
  alpha.kind = NodeKind::kAlphaTerm;
  alpha.alpha = a;
  n.children.push_back(std::move(alpha));
  n.children.push_back(std::move(child));
  return n;
}

Node ts(int d, Node child) {
  Node n;
  n.kind = NodeKind::kShiftBy;
  Node delta;
  delta.kind = NodeKind::kDeltaTerm;
  delta.delta = d;
  n.children.push_back(std::move(delta));
  n.children.push_back(std::move(child));
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

TEST_CASE("scaling value selection follows the valid-range rule") {
  // Apply MR2 to a trace with max 1 and min -0.5 inside a [-2, 2] range:
  // the valid scaling values span [0, 2].
  Eigen::MatrixXd m(1, 2);
  m << 1.0, -0.5;
  const Trace x(m, 0.02);
  const AmplitudeRange range = sym_range(1, 2.0);
  const double cap = 1e9;  // not binding here
  const double s_max = max_scale_for(x, range, cap);
  CHECK(s_max == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(0.5 * s_max == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(0.33 * s_max == doctest::Approx(0.66).epsilon(1e-9));
}

TEST_CASE("scaling cap limits traces with tiny values") {
  // A trace that only reaches 0.001 in a +-2 range would allow scaling by
  // 2000; the cap (half-width over initial amplitude) keeps it at 100.
  Eigen::MatrixXd m(1, 2);
  m << 0.001, 0.0005;
  const Trace x(m, 0.02);
  const AmplitudeRange range = sym_range(1, 2.0);
  const double cap = scale_cap(range, Eigen::VectorXd::Constant(1, 0.02));
  CHECK(cap == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(max_scale_for(x, range, cap) == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("zero subtree falls back to the cap") {
  const Trace x = Trace::zeros(1, 4, 0.02);
  const AmplitudeRange range = sym_range(1, 2.0);
  CHECK(max_scale_for(x, range, 10.0) == doctest::Approx(10.0));
}

TEST_CASE("scaling a full-range subtree never leaves the range") {
  const ProgramSpace space = test_space(1, 2.0);  // terminals already span the range
  const AmplitudeRange range = sym_range(1, 2.0);
  CHECK(scale_cap(range, space.b_amp) == doctest::Approx(1.0).epsilon(1e-9));
  Rng rng(3);
  for (double alpha : {0.1, 0.5, 0.99, 1.0}) {
    const Program p(as(alpha, trc(0.5, 1.5, 2.5, 3.5, PatternKind::kTriangle, 2.0)));
    const Realization r = realize(p, range, space);
    CHECK(r.input.samples().cwiseAbs().maxCoeff() <= 2.0);
  }
}

TEST_CASE("superimposing in-range traces stays in range and halves") {
  const ProgramSpace space = test_space();
  const AmplitudeRange range = sym_range(1, 2.0);
  const Program p(sp(trc(), trc(0.2, 1.0, 2.0, 3.0, PatternKind::kTriangle)));
  const Realization r = realize(p, range, space);
  CHECK(r.input.samples().cwiseAbs().maxCoeff() <= 2.0);
  // SP is composed with a fixed halving, so the two summands enter at 0.5.
  const Trace expected =
      scale(superimpose(r.terminal_inputs[0], r.terminal_inputs[1]), 0.5);
  CHECK(r.input == expected);
}

TEST_CASE("random realizations stay within the amplitude range") {
  ProgramSpace space = test_space(2);
  space.b_amp = Eigen::Vector2d(0.2, 0.3);
  AmplitudeRange range;
  range.lo = Eigen::Vector2d(-2.0, 0.5);
  range.hi = Eigen::Vector2d(2.0, 1.2);
  const Eigen::VectorXd hw = range.half_width();
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const Program p = generate_random(space, rng);
    const Realization r = realize(p, range, space);
    for (Eigen::Index d = 0; d < 2; ++d) {
      CHECK(r.input.samples().row(d).cwiseAbs().maxCoeff() <= hw(d));
    }
  }
}

TEST_CASE("replaying the recipe over terminal inputs reproduces the input") {
  const ProgramSpace space = test_space();
  const AmplitudeRange range = sym_range(1, 2.0);
  Rng rng(23);
  for (int i = 0; i < 300; ++i) {
    const Program p = generate_random(space, rng);
    const Realization r = realize(p, range, space);
    const Trace replayed = expected_output(r.recipe, r.terminal_inputs);
    CHECK(replayed == r.input);  // bit-exact: same operations, same order
  }
}

TEST_CASE("expected output identities") {
  const ProgramSpace space = test_space();
  const AmplitudeRange range = sym_range(1, 2.0);

  SUBCASE("identity scaling passes the terminal output through") {
    // alpha = 1 over a terminal whose amplitude spans the full range maps to
    // an actual scaling of 1 (up to the rounding shave).
    const ProgramSpace full = test_space(1, 2.0);
    const Program p(as(1.0, trc(0.5, 1.5, 2.5, 3.5, PatternKind::kRampHold, 2.0)));
    const Realization r = realize(p, range, full);
    Eigen::MatrixXd out(1, full.k_max);
    out.setRandom();
    const Trace g(out, full.dt);
    const Trace e = expected_output(r.recipe, std::vector<Trace>{g});
    CHECK(distance(e, g) < 1e-9);
  }

  SUBCASE("superimposing a terminal with itself reproduces its output") {
    const Node t = trc();
    const Program p(sp(t, t));
    const Realization r = realize(p, range, space);
    REQUIRE(r.terminal_inputs.size() == 2);
    CHECK(r.terminal_inputs[0] == r.terminal_inputs[1]);
    Eigen::MatrixXd out(1, space.k_max);
    out.setRandom();
    const Trace g(out, space.dt);
    const Trace e = expected_output(r.recipe, std::vector<Trace>{g, g});
    CHECK(e == g);  // (g + g) / 2 is exact in binary arithmetic
  }

  SUBCASE("composed scale and shift replay over outputs") {
    // (alpha AS r_x) SP (delta TS r_y) expects 0.5 * (s * G[r_x] + shift(G[r_y], delta)).
    const Program p(sp(as(0.4, trc()), ts(10, trc(0.2, 1.0, 2.0, 3.0))));
    const Realization r = realize(p, range, space);
    REQUIRE(r.terminal_inputs.size() == 2);
    Eigen::MatrixXd g1m(1, space.k_max), g2m(1, space.k_max);
    g1m.setRandom();
    g2m.setRandom();
    const Trace g1(g1m, space.dt), g2(g2m, space.dt);
    const Trace e = expected_output(r.recipe, std::vector<Trace>{g1, g2});
    const double s = 0.4 * max_scale_for(r.terminal_inputs[0], range,
                                         scale_cap(range, space.b_amp));
    const Trace manual = scale(superimpose(scale(g1, s), shift(g2, 10)), 0.5);
    CHECK(distance(e, manual) < 1e-12);
  }

  SUBCASE("missing terminal output is a usage error") {
    const Program p(sp(trc(), trc(0.2, 1.0, 2.0, 3.0)));
    const Realization r = realize(p, range, space);
    Eigen::MatrixXd out(1, space.k_max);
    out.setZero();
    CHECK_THROWS_AS(expected_output(r.recipe, std::vector<Trace>{Trace(out, space.dt)}),
                    std::invalid_argument);
  }
}

TEST_CASE("deterministic realization for a fixed seed") {
  const ProgramSpace space = test_space(2);
  AmplitudeRange range = sym_range(2, 2.0);
  Rng rng_a(99);
  Rng rng_b(99);
  for (int i = 0; i < 20; ++i) {
    const Program a = generate_random(space, rng_a);
    const Program b = generate_random(space, rng_b);
    REQUIRE(a == b);
    CHECK(a.to_text() == b.to_text());
    CHECK(realize(a, range, space).input == realize(b, range, space).input);
  }
}
