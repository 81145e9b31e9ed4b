#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mrf {

/// Shapes of the zero-centred initial input traces. Each rises/falls in
/// linear segments between randomly drawn time instants t1..t4 and never
/// leaves [-amplitude, +amplitude].
enum class PatternKind { kStepUpDown, kRampHold, kTriangle, kTrapezoid };

const char* pattern_name(PatternKind kind);
PatternKind pattern_from_name(const std::string& name);

/// One dimension of an initial-trace terminal: a pattern shape, its time
/// instants in seconds and the fixed amplitude it swings over.
struct DimPattern {
  PatternKind kind{PatternKind::kStepUpDown};
  double t1{0}, t2{0}, t3{0}, t4{0};
  double amplitude{0};

  /// Piecewise-linear value at time t (seconds), in [-amplitude, amplitude].
  double value_at(double t) const;

  friend bool operator==(const DimPattern&, const DimPattern&) = default;
};

/// Ephemeral constant of a trace terminal: one independently drawn pattern
/// per signal dimension.
struct PatternSpec {
  std::vector<DimPattern> dims;

  friend bool operator==(const PatternSpec&, const PatternSpec&) = default;
};

enum class NodeKind : std::uint8_t {
  kTraceTerm,   // initial input trace (ephemeral PatternSpec)
  kAlphaTerm,   // scaling value in [0,1] (ephemeral)
  kDeltaTerm,   // time shift in samples (ephemeral, grid-quantized)
  kSuperimpose, // SP: children = {trace, trace}
  kScaleBy,     // AS: children = {alpha terminal, trace}
  kShiftBy,     // TS: children = {delta terminal, trace}
};

bool is_terminal(NodeKind kind);
/// True for nodes whose value is a trace (terminals included).
bool is_trace_typed(NodeKind kind);

struct Node {
  NodeKind kind{NodeKind::kTraceTerm};
  PatternSpec pattern;  // kTraceTerm
  double alpha{0.0};    // kAlphaTerm
  int delta{0};         // kDeltaTerm, in samples
  std::vector<Node> children;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Sampling space for programs: trace geometry, the per-dimension initial
/// amplitude, how far time params and shifts may reach, and the structural
/// bounds enforced on every individual.
struct ProgramSpace {
  Eigen::Index n_dim{1};
  double dt{0.02};
  Eigen::Index k_max{500};
  Eigen::VectorXd b_amp;        // per-dimension initial-trace amplitude
  double pattern_time_limit{7}; // upper bound for t1..t4, seconds
  int max_shift_samples{125};   // delta grid is {0, 1, ..., max_shift_samples}
  int min_depth{4};             // nested non-terminals, initial population
  int max_depth{8};
  int mutation_min_depth{2};
  int mutation_max_depth{4};
  int max_nodes{300};
};

using Rng = std::mt19937_64;

/// Expression tree over MR applications. Depth counts nested non-terminal
/// symbols, so a bare terminal has depth 0 and the smallest legal program
/// (one non-terminal over terminals) has depth 1.
class Program {
 public:
  Program() = default;
  explicit Program(Node root) : root_(std::move(root)) {}

  const Node& root() const { return root_; }
  Node& root() { return root_; }

  int depth() const;
  int node_count() const;
  /// Grammar validity: SP has two trace children, AS/TS carry exactly one
  /// value terminal plus one trace subtree, the root is trace-typed and
  /// contains at least one non-terminal, and the node cap holds.
  bool valid(const ProgramSpace& space) const;

  /// Prefix S-expression, e.g. "(SP (AS 0.42 (TRC step 1 3.2 5.5 7)) (TS 12 ...))".
  /// Trace terminals list one "kind t1 t2 t3 t4" group per dimension; the
  /// fixed amplitude is restored from the space at parse time.
  std::string to_text() const;
  static Program parse(const std::string& text, const ProgramSpace& space);

  friend bool operator==(const Program&, const Program&) = default;

 private:
  Node root_;
};

/// Fresh grammar-valid tree with depth in [space.min_depth, space.max_depth]
/// and every ephemeral constant independently randomized.
Program generate_random(const ProgramSpace& space, Rng& rng);

/// Replaces one uniformly chosen node: value terminals get fresh ephemeral
/// constants, trace-typed nodes get a random subtree with depth in
/// [mutation_min_depth, mutation_max_depth]. Resamples on node-cap violation.
Program mutate(const Program& p, const ProgramSpace& space, Rng& rng);

/// Swaps a random node of p1 with a random type-compatible node of p2.
/// Resamples choices that break the grammar or the node cap; after 20
/// failed attempts the parents are returned unchanged.
std::pair<Program, Program> crossover(const Program& p1, const Program& p2,
                                      const ProgramSpace& space, Rng& rng);

/// Deterministic variants used by tests: operate on nodes addressed by
/// preorder index (values terminals included in the numbering).
Program mutate_at(const Program& p, int node_index, const ProgramSpace& space, Rng& rng);
std::pair<Program, Program> crossover_at(const Program& p1, int index1, const Program& p2,
                                         int index2);

/// Preorder access, index 0 is the root.
const Node& node_at(const Program& p, int index);

}  // namespace mrf
