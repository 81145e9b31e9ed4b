#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mrfalsify/program.hpp"

using namespace mrf;

namespace {

ProgramSpace test_space(Eigen::Index n_dim = 1) {
  ProgramSpace s;
  s.n_dim = n_dim;
  s.dt = 0.02;
  s.k_max = 500;
  s.b_amp = Eigen::VectorXd::Constant(n_dim, 0.2);
  s.pattern_time_limit = 7.0;
  s.max_shift_samples = 125;
  return s;
}

Node trc(double t1 = 1.0, double t2 = 2.0, double t3 = 3.0, double t4 = 4.0,
         PatternKind kind = PatternKind::kStepUpDown) {
  Node n;
  n.kind = NodeKind::kTraceTerm;
  n.pattern.dims.push_back(DimPattern{kind, t1, t2, t3, t4, 0.2});
  return n;
}

Node alpha_term(double a) {
  Node n;
  n.kind = NodeKind::kAlphaTerm;
  n.alpha = a;
  return n;
}

Node delta_term(int d) {
  Node n;
  n.kind = NodeKind::kDeltaTerm;
  n.delta = d;
  return n;
}

Node as(double a, Node child) {
  Node n;
  n.kind = NodeKind::kScaleBy;
  n.children.push_back(alpha_term(a));
  n.children.push_back(std::move(child));
  return n;
}

Node ts(int d, Node child) {
  Node n;
  n.kind = NodeKind::kShiftBy;
  n.children.push_back(delta_term(d));
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

TEST_CASE("generator respects depth bounds and grammar") {
  ProgramSpace space = test_space();
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Program p = generate_random(space, rng);
    CHECK(p.valid(space));
    CHECK(p.depth() >= 4);
    CHECK(p.depth() <= 8);
    CHECK(p.node_count() <= 300);
  }
}

TEST_CASE("depth bounds (1,1) give the smallest legal program") {
  ProgramSpace space = test_space();
  space.min_depth = 1;
  space.max_depth = 1;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Program p = generate_random(space, rng);
    CHECK(p.valid(space));
    CHECK(p.depth() == 1);
  }
}

TEST_CASE("depth counts nested non-terminals") {
  const Program leafed(sp(trc(), trc()));
  CHECK(leafed.depth() == 1);
  CHECK(leafed.node_count() == 3);
  const Program nested(as(0.5, sp(trc(), ts(3, trc()))));
  CHECK(nested.depth() == 3);
  CHECK(nested.node_count() == 7);
}

TEST_CASE("mutation stays grammar valid") {
  ProgramSpace space = test_space();
  Rng rng(5);
  Program p = generate_random(space, rng);
  for (int i = 0; i < 1000; ++i) {
    p = mutate(p, space, rng);
    CHECK(p.valid(space));
    CHECK(p.node_count() <= 300);
  }
}

TEST_CASE("mutating an alpha terminal changes exactly one value") {
  ProgramSpace space = test_space();
  Rng rng(6);
  //       0    1          2  3    4     5  6
  // (SP (AS alpha TRC) (TS delta TRC)) preorder
  const Program p(sp(as(0.25, trc()), ts(7, trc(1.5, 2.5, 3.5, 4.5))));
  const Program q = mutate_at(p, 2, space, rng);
  CHECK(q.valid(space));
  CHECK(q.root().children[0].children[0].alpha != p.root().children[0].children[0].alpha);
  // Everything except the alpha value is untouched.
  Program q_restored = q;
  q_restored.root().children[0].children[0].alpha = p.root().children[0].children[0].alpha;
  CHECK(q_restored == p);
}

TEST_CASE("mutating a delta terminal keeps it on the shift grid") {
  ProgramSpace space = test_space();
  Rng rng(61);
  const Program p(ts(7, trc()));
  for (int i = 0; i < 50; ++i) {
    const Program q = mutate_at(p, 1, space, rng);
    CHECK(q.root().children[0].delta >= 0);
    CHECK(q.root().children[0].delta <= space.max_shift_samples);
  }
}

TEST_CASE("mutated subtrees respect their depth bounds") {
  ProgramSpace space = test_space();
  Rng rng(62);
  const Program p(sp(trc(), trc()));
  for (int i = 0; i < 200; ++i) {
    // Node 1 is the left trace terminal; its replacement is a fresh subtree.
    const Program q = mutate_at(p, 1, space, rng);
    const Node& replaced = q.root().children[0];
    const int d = Program(replaced).depth();
    CHECK(d >= space.mutation_min_depth);
    CHECK(d <= space.mutation_max_depth);
  }
}

TEST_CASE("crossover stays grammar valid") {
  ProgramSpace space = test_space();
  Rng rng(7);
  Program a = generate_random(space, rng);
  Program b = generate_random(space, rng);
  for (int i = 0; i < 1000; ++i) {
    auto [c1, c2] = crossover(a, b, space, rng);
    CHECK(c1.valid(space));
    CHECK(c2.valid(space));
    a = std::move(c1);
    b = std::move(c2);
  }
}

TEST_CASE("self crossover at the same node returns the parents") {
  const Program p(sp(as(0.25, trc()), ts(7, trc())));
  for (int i = 0; i < p.node_count(); ++i) {
    auto [c1, c2] = crossover_at(p, i, p, i);
    CHECK(c1 == p);
    CHECK(c2 == p);
  }
}

TEST_CASE("crossover reproduces the worked swap example") {
  // P1 = (a1 AS r_x) SP (d TS r_y), P2 = a2 AS (r_w SP r_j); swapping
  // (a1 AS r_x) with r_w yields P3 = r_w SP (d TS r_y) and
  // P4 = a2 AS ((a1 AS r_x) SP r_j).
  const Node r_x = trc(1.0, 2.0, 3.0, 4.0);
  const Node r_y = trc(1.1, 2.1, 3.1, 4.1);
  const Node r_w = trc(1.2, 2.2, 3.2, 4.2);
  const Node r_j = trc(1.3, 2.3, 3.3, 4.3);
  const Program p1(sp(as(0.4, r_x), ts(9, r_y)));
  const Program p2(as(0.6, sp(r_w, r_j)));

  // Preorder: p1 index 1 is (a1 AS r_x); p2 index 3 is r_w.
  auto [p3, p4] = crossover_at(p1, 1, p2, 3);
  CHECK(p3 == Program(sp(r_w, ts(9, r_y))));
  CHECK(p4 == Program(as(0.6, sp(as(0.4, r_x), r_j))));
}

TEST_CASE("serialization round trips losslessly") {
  ProgramSpace space = test_space(2);
  space.b_amp = Eigen::Vector2d(0.2, 0.3);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Program p = generate_random(space, rng);
    const Program q = Program::parse(p.to_text(), space);
    CHECK(q == p);
  }
}

TEST_CASE("serialization has the documented shape") {
  const Program p(sp(as(0.42, trc(1.0, 3.2, 5.5, 7.0)),
                     ts(12, trc(0.5, 2.0, 4.0, 6.0, PatternKind::kTriangle))));
  CHECK(p.to_text() ==
        "(SP (AS 0.42 (TRC step 1 3.2 5.5 7)) (TS 12 (TRC triangle 0.5 2 4 6)))");
}

TEST_CASE("parse rejects malformed programs") {
  const ProgramSpace space = test_space();
  CHECK_THROWS_AS(Program::parse("(SP (TRC step 1 2 3 4))", space), std::invalid_argument);
  CHECK_THROWS_AS(Program::parse("(AS 0.5)", space), std::invalid_argument);
  CHECK_THROWS_AS(Program::parse("(XX 0.5 (TRC step 1 2 3 4))", space), std::invalid_argument);
  CHECK_THROWS_AS(Program::parse("(TRC step 1 2 3 4) junk", space), std::invalid_argument);
}

TEST_CASE("pattern waveforms stay within the amplitude") {
  for (int kind = 0; kind < 4; ++kind) {
    DimPattern p{static_cast<PatternKind>(kind), 1.0, 2.5, 4.0, 6.0, 0.2};
    double max_abs = std::abs(p.value_at(p.t2));  // every pattern peaks by t2
    for (double t = 0.0; t < 8.0; t += 0.01) {
      max_abs = std::max(max_abs, std::abs(p.value_at(t)));
      CHECK(std::abs(p.value_at(t)) <= 0.2);
    }
    CHECK(max_abs == doctest::Approx(0.2));
    CHECK(p.value_at(0.0) == 0.0);
    CHECK(p.value_at(7.5) == 0.0);
  }
}
