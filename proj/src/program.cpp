#include "mrfalsify/program.hpp"

#include "mrfalsify/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mrf {

namespace {

double lerp_clamped(double t, double a, double b, double v0, double v1) {
  double f = b > a ? (t - a) / (b - a) : 1.0;
  f = std::clamp(f, 0.0, 1.0);
  return v0 + f * (v1 - v0);
}

}  // namespace

const char* pattern_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::kStepUpDown: return "step";
    case PatternKind::kRampHold: return "ramp";
    case PatternKind::kTriangle: return "triangle";
    case PatternKind::kTrapezoid: return "trapezoid";
  }
  return "?";
}

PatternKind pattern_from_name(const std::string& name) {
  if (name == "step") return PatternKind::kStepUpDown;
  if (name == "ramp") return PatternKind::kRampHold;
  if (name == "triangle") return PatternKind::kTriangle;
  if (name == "trapezoid") return PatternKind::kTrapezoid;
  throw std::invalid_argument("unknown pattern kind: " + name);
}

double DimPattern::value_at(double t) const {
  const double a = amplitude;
  double v = 0.0;
  switch (kind) {
    case PatternKind::kStepUpDown:
      if (t >= t1 && t < t2) v = a;
      else if (t >= t2 && t < t3) v = -a;
      break;
    case PatternKind::kRampHold:
      if (t >= t1 && t < t2) v = lerp_clamped(t, t1, t2, 0.0, a);
      else if (t >= t2 && t < t3) v = a;
      else if (t >= t3 && t < t4) v = lerp_clamped(t, t3, t4, a, 0.0);
      break;
    case PatternKind::kTriangle:
      if (t >= t1 && t < t2) v = lerp_clamped(t, t1, t2, 0.0, a);
      else if (t >= t2 && t < t3) v = lerp_clamped(t, t2, t3, a, -a);
      else if (t >= t3 && t < t4) v = lerp_clamped(t, t3, t4, -a, 0.0);
      break;
    case PatternKind::kTrapezoid:
      if (t >= t1 && t < t2) v = lerp_clamped(t, t1, t2, 0.0, -a);
      else if (t >= t2 && t < t3) v = -a;
      else if (t >= t3 && t < t4) v = lerp_clamped(t, t3, t4, -a, 0.0);
      break;
  }
  return std::clamp(v, -a, a);
}

bool is_terminal(NodeKind kind) {
  return kind == NodeKind::kTraceTerm || kind == NodeKind::kAlphaTerm ||
         kind == NodeKind::kDeltaTerm;
}

bool is_trace_typed(NodeKind kind) {
  return kind == NodeKind::kTraceTerm || kind == NodeKind::kSuperimpose ||
         kind == NodeKind::kScaleBy || kind == NodeKind::kShiftBy;
}

namespace {

int node_depth(const Node& n) {
  if (is_terminal(n.kind)) return 0;
  int d = 0;
  for (const Node& c : n.children) d = std::max(d, node_depth(c));
  return d + 1;
}

int count_nodes(const Node& n) {
  int c = 1;
  for (const Node& child : n.children) c += count_nodes(child);
  return c;
}

bool node_valid(const Node& n, const ProgramSpace& space) {
  switch (n.kind) {
    case NodeKind::kTraceTerm:
      return n.children.empty() &&
             static_cast<Eigen::Index>(n.pattern.dims.size()) == space.n_dim;
    case NodeKind::kAlphaTerm:
      return n.children.empty() && n.alpha >= 0.0 && n.alpha <= 1.0;
    case NodeKind::kDeltaTerm:
      return n.children.empty() && n.delta >= 0 && n.delta <= space.max_shift_samples;
    case NodeKind::kSuperimpose:
      return n.children.size() == 2 && is_trace_typed(n.children[0].kind) &&
             is_trace_typed(n.children[1].kind) && node_valid(n.children[0], space) &&
             node_valid(n.children[1], space);
    case NodeKind::kScaleBy:
      return n.children.size() == 2 && n.children[0].kind == NodeKind::kAlphaTerm &&
             is_trace_typed(n.children[1].kind) && node_valid(n.children[0], space) &&
             node_valid(n.children[1], space);
    case NodeKind::kShiftBy:
      return n.children.size() == 2 && n.children[0].kind == NodeKind::kDeltaTerm &&
             is_trace_typed(n.children[1].kind) && node_valid(n.children[0], space) &&
             node_valid(n.children[1], space);
  }
  return false;
}

void flatten(Node& n, std::vector<Node*>& out) {
  out.push_back(&n);
  for (Node& c : n.children) flatten(c, out);
}

void flatten_const(const Node& n, std::vector<const Node*>& out) {
  out.push_back(&n);
  for (const Node& c : n.children) flatten_const(c, out);
}

Node make_alpha(const ProgramSpace&, Rng& rng) {
  Node n;
  n.kind = NodeKind::kAlphaTerm;
  n.alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return n;
}

Node make_delta(const ProgramSpace& space, Rng& rng) {
  Node n;
  n.kind = NodeKind::kDeltaTerm;
  n.delta = std::uniform_int_distribution<int>(0, space.max_shift_samples)(rng);
  return n;
}

Node make_trace_terminal(const ProgramSpace& space, Rng& rng) {
  Node n;
  n.kind = NodeKind::kTraceTerm;
  n.pattern.dims.resize(static_cast<size_t>(space.n_dim));
  std::uniform_int_distribution<int> kind_dist(0, 3);
  std::uniform_real_distribution<double> time_dist(0.0, space.pattern_time_limit);
  for (Eigen::Index i = 0; i < space.n_dim; ++i) {
    DimPattern& p = n.pattern.dims[static_cast<size_t>(i)];
    p.kind = static_cast<PatternKind>(kind_dist(rng));
    std::array<double, 4> ts{time_dist(rng), time_dist(rng), time_dist(rng), time_dist(rng)};
    std::sort(ts.begin(), ts.end());
    p.t1 = ts[0];
    p.t2 = ts[1];
    p.t3 = ts[2];
    p.t4 = ts[3];
    p.amplitude = space.b_amp(i);
  }
  return n;
}

// min_rem/max_rem are the remaining nested non-terminal levels this subtree
// must/may still contribute.
Node gen_trace(const ProgramSpace& space, Rng& rng, int min_rem, int max_rem) {
  if (max_rem <= 0) return make_trace_terminal(space, rng);
  std::uniform_int_distribution<int> pick(min_rem > 0 ? 1 : 0, 3);
  const int choice = pick(rng);
  Node n;
  switch (choice) {
    case 0:
      return make_trace_terminal(space, rng);
    case 1: {
      n.kind = NodeKind::kSuperimpose;
      const bool deep_left = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
      const int child_min = std::max(0, min_rem - 1);
      n.children.push_back(gen_trace(space, rng, deep_left ? child_min : 0, max_rem - 1));
      n.children.push_back(gen_trace(space, rng, deep_left ? 0 : child_min, max_rem - 1));
      break;
    }
    case 2:
      n.kind = NodeKind::kScaleBy;
      n.children.push_back(make_alpha(space, rng));
      n.children.push_back(gen_trace(space, rng, std::max(0, min_rem - 1), max_rem - 1));
      break;
    case 3:
      n.kind = NodeKind::kShiftBy;
      n.children.push_back(make_delta(space, rng));
      n.children.push_back(gen_trace(space, rng, std::max(0, min_rem - 1), max_rem - 1));
      break;
  }
  return n;
}

// Size-bounded fallback: a chain of AS/TS wrappers is linear in depth, so it
// can never trip the node cap that rejection sampling is retrying against.
Node gen_chain(const ProgramSpace& space, Rng& rng, int depth) {
  Node n = make_trace_terminal(space, rng);
  for (int i = 0; i < depth; ++i) {
    Node wrap;
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
      wrap.kind = NodeKind::kScaleBy;
      wrap.children.push_back(make_alpha(space, rng));
    } else {
      wrap.kind = NodeKind::kShiftBy;
      wrap.children.push_back(make_delta(space, rng));
    }
    wrap.children.push_back(std::move(n));
    n = std::move(wrap);
  }
  return n;
}

void write_node(const Node& n, std::ostringstream& os) {
  switch (n.kind) {
    case NodeKind::kTraceTerm: {
      os << "(TRC";
      for (const DimPattern& p : n.pattern.dims) {
        os << ' ' << pattern_name(p.kind) << ' ' << format_double(p.t1) << ' '
           << format_double(p.t2) << ' ' << format_double(p.t3) << ' ' << format_double(p.t4);
      }
      os << ')';
      break;
    }
    case NodeKind::kAlphaTerm:
      os << format_double(n.alpha);
      break;
    case NodeKind::kDeltaTerm:
      os << n.delta;
      break;
    case NodeKind::kSuperimpose:
      os << "(SP ";
      write_node(n.children[0], os);
      os << ' ';
      write_node(n.children[1], os);
      os << ')';
      break;
    case NodeKind::kScaleBy:
      os << "(AS ";
      write_node(n.children[0], os);
      os << ' ';
      write_node(n.children[1], os);
      os << ')';
      break;
    case NodeKind::kShiftBy:
      os << "(TS ";
      write_node(n.children[0], os);
      os << ' ';
      write_node(n.children[1], os);
      os << ')';
      break;
  }
}

struct Tokenizer {
  std::vector<std::string> tokens;
  size_t pos = 0;

  explicit Tokenizer(const std::string& text) {
    std::string cur;
    for (char c : text) {
      if (c == '(' || c == ')') {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
        tokens.push_back(std::string(1, c));
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }

  const std::string& next() {
    if (pos >= tokens.size()) throw std::invalid_argument("program parse: unexpected end of input");
    return tokens[pos++];
  }
  const std::string& peek() const {
    if (pos >= tokens.size()) throw std::invalid_argument("program parse: unexpected end of input");
    return tokens[pos];
  }
  void expect(const char* tok) {
    if (next() != tok) throw std::invalid_argument(std::string("program parse: expected ") + tok);
  }
  bool done() const { return pos == tokens.size(); }
};

double parse_double(const std::string& tok) {
  size_t used = 0;
  const double v = std::stod(tok, &used);
  if (used != tok.size()) throw std::invalid_argument("program parse: bad number " + tok);
  return v;
}

Node parse_trace_node(Tokenizer& tz, const ProgramSpace& space) {
  tz.expect("(");
  const std::string head = tz.next();
  Node n;
  if (head == "TRC") {
    n.kind = NodeKind::kTraceTerm;
    for (Eigen::Index i = 0; i < space.n_dim; ++i) {
      DimPattern p;
      p.kind = pattern_from_name(tz.next());
      p.t1 = parse_double(tz.next());
      p.t2 = parse_double(tz.next());
      p.t3 = parse_double(tz.next());
      p.t4 = parse_double(tz.next());
      p.amplitude = space.b_amp(i);
      n.pattern.dims.push_back(p);
    }
  } else if (head == "AS") {
    n.kind = NodeKind::kScaleBy;
    Node a;
    a.kind = NodeKind::kAlphaTerm;
    a.alpha = parse_double(tz.next());
    n.children.push_back(std::move(a));
    n.children.push_back(parse_trace_node(tz, space));
  } else if (head == "TS") {
    n.kind = NodeKind::kShiftBy;
    Node d;
    d.kind = NodeKind::kDeltaTerm;
    d.delta = static_cast<int>(std::stol(tz.next()));
    n.children.push_back(std::move(d));
    n.children.push_back(parse_trace_node(tz, space));
  } else if (head == "SP") {
    n.kind = NodeKind::kSuperimpose;
    n.children.push_back(parse_trace_node(tz, space));
    n.children.push_back(parse_trace_node(tz, space));
  } else {
    throw std::invalid_argument("program parse: unknown node " + head);
  }
  tz.expect(")");
  return n;
}

enum class SwapClass { kTrace, kAlpha, kDelta };

SwapClass swap_class(NodeKind kind) {
  if (kind == NodeKind::kAlphaTerm) return SwapClass::kAlpha;
  if (kind == NodeKind::kDeltaTerm) return SwapClass::kDelta;
  return SwapClass::kTrace;
}

}  // namespace

int Program::depth() const { return node_depth(root_); }

int Program::node_count() const { return count_nodes(root_); }

bool Program::valid(const ProgramSpace& space) const {
  return !is_terminal(root_.kind) && is_trace_typed(root_.kind) && node_valid(root_, space) &&
         node_count() <= space.max_nodes;
}

std::string Program::to_text() const {
  std::ostringstream os;
  write_node(root_, os);
  return os.str();
}

Program Program::parse(const std::string& text, const ProgramSpace& space) {
  Tokenizer tz(text);
  Node root = parse_trace_node(tz, space);
  if (!tz.done()) throw std::invalid_argument("program parse: trailing tokens");
  return Program(std::move(root));
}

Program generate_random(const ProgramSpace& space, Rng& rng) {
  const int min_d = std::max(1, space.min_depth);
  const int max_d = std::max(min_d, space.max_depth);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Program p(gen_trace(space, rng, min_d, max_d));
    if (p.node_count() <= space.max_nodes) return p;
  }
  return Program(gen_chain(space, rng, min_d));
}

const Node& node_at(const Program& p, int index) {
  std::vector<const Node*> nodes;
  flatten_const(p.root(), nodes);
  return *nodes.at(static_cast<size_t>(index));
}

Program mutate_at(const Program& p, int node_index, const ProgramSpace& space, Rng& rng) {
  Program out = p;
  std::vector<Node*> nodes;
  flatten(out.root(), nodes);
  Node* target = nodes.at(static_cast<size_t>(node_index));
  switch (target->kind) {
    case NodeKind::kAlphaTerm:
      *target = make_alpha(space, rng);
      break;
    case NodeKind::kDeltaTerm:
      *target = make_delta(space, rng);
      break;
    default:
      *target = gen_trace(space, rng, std::max(1, space.mutation_min_depth),
                          std::max(1, space.mutation_max_depth));
      break;
  }
  return out;
}

Program mutate(const Program& p, const ProgramSpace& space, Rng& rng) {
  const int n = p.node_count();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int idx = std::uniform_int_distribution<int>(0, n - 1)(rng);
    Program out = mutate_at(p, idx, space, rng);
    if (out.node_count() <= space.max_nodes) return out;
  }
  return p;
}

std::pair<Program, Program> crossover_at(const Program& p1, int index1, const Program& p2,
                                         int index2) {
  Program c1 = p1;
  Program c2 = p2;
  std::vector<Node*> n1;
  std::vector<Node*> n2;
  flatten(c1.root(), n1);
  flatten(c2.root(), n2);
  std::swap(*n1.at(static_cast<size_t>(index1)), *n2.at(static_cast<size_t>(index2)));
  return {std::move(c1), std::move(c2)};
}

std::pair<Program, Program> crossover(const Program& p1, const Program& p2,
                                      const ProgramSpace& space, Rng& rng) {
  std::vector<const Node*> nodes1;
  std::vector<const Node*> nodes2;
  flatten_const(p1.root(), nodes1);
  flatten_const(p2.root(), nodes2);
  for (int attempt = 0; attempt < 20; ++attempt) {
    const int i =
        std::uniform_int_distribution<int>(0, static_cast<int>(nodes1.size()) - 1)(rng);
    const SwapClass cls = swap_class(nodes1[static_cast<size_t>(i)]->kind);
    std::vector<int> compatible;
    for (int j = 0; j < static_cast<int>(nodes2.size()); ++j) {
      if (swap_class(nodes2[static_cast<size_t>(j)]->kind) == cls) compatible.push_back(j);
    }
    if (compatible.empty()) continue;
    const int j = compatible[static_cast<size_t>(std::uniform_int_distribution<int>(
        0, static_cast<int>(compatible.size()) - 1)(rng))];
    auto [c1, c2] = crossover_at(p1, i, p2, j);
    if (c1.valid(space) && c2.valid(space)) return {std::move(c1), std::move(c2)};
  }
  return {p1, p2};
}

}  // namespace mrf
