#include "mrfalsify/realize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mrf {

namespace {

constexpr double kRoundingShave = 1.0 - 1e-12;

Trace sample_pattern(const PatternSpec& spec, const ProgramSpace& space) {
  Eigen::MatrixXd samples(space.n_dim, space.k_max);
  for (Eigen::Index i = 0; i < space.n_dim; ++i) {
    const DimPattern& p = spec.dims[static_cast<size_t>(i)];
    for (Eigen::Index k = 0; k < space.k_max; ++k) {
      samples(i, k) = p.value_at(static_cast<double>(k) * space.dt);
    }
  }
  return Trace(std::move(samples), space.dt);
}

// Builds the recipe and collects terminal input traces; the follow-up input
// itself is produced afterwards by replaying the recipe, so input and
// expected output always go through the same arithmetic.
OutputRecipe build_recipe(const Node& n, const AmplitudeRange& range, const ProgramSpace& space,
                          double cap, std::vector<Trace>& terminal_inputs, Trace& subtree_input) {
  OutputRecipe r;
  switch (n.kind) {
    case NodeKind::kTraceTerm: {
      r.op = OutputRecipe::Op::kLeaf;
      r.terminal_index = static_cast<int>(terminal_inputs.size());
      terminal_inputs.push_back(sample_pattern(n.pattern, space));
      subtree_input = terminal_inputs.back();
      break;
    }
    case NodeKind::kSuperimpose: {
      r.op = OutputRecipe::Op::kSuperimposeHalve;
      Trace left = Trace::zeros(1, 1, 1.0);
      Trace right = Trace::zeros(1, 1, 1.0);
      r.children.push_back(
          build_recipe(n.children[0], range, space, cap, terminal_inputs, left));
      r.children.push_back(
          build_recipe(n.children[1], range, space, cap, terminal_inputs, right));
      subtree_input = scale(superimpose(left, right), 0.5);
      break;
    }
    case NodeKind::kScaleBy: {
      r.op = OutputRecipe::Op::kScale;
      Trace child = Trace::zeros(1, 1, 1.0);
      OutputRecipe sub = build_recipe(n.children[1], range, space, cap, terminal_inputs, child);
      const double s_max = max_scale_for(child, range, cap);
      r.scale_factor = n.children[0].alpha * s_max;
      r.children.push_back(std::move(sub));
      subtree_input = scale(child, r.scale_factor);
      break;
    }
    case NodeKind::kShiftBy: {
      r.op = OutputRecipe::Op::kShift;
      r.delta_samples = n.children[0].delta;
      Trace child = Trace::zeros(1, 1, 1.0);
      r.children.push_back(
          build_recipe(n.children[1], range, space, cap, terminal_inputs, child));
      subtree_input = shift(child, r.delta_samples);
      break;
    }
    default:
      throw std::invalid_argument("realize: value terminal where a trace was expected");
  }
  return r;
}

}  // namespace

Trace OutputRecipe::replay(std::span<const Trace> terminal_traces) const {
  switch (op) {
    case Op::kLeaf:
      if (terminal_index < 0 || static_cast<size_t>(terminal_index) >= terminal_traces.size()) {
        throw std::invalid_argument("expected_output: missing terminal trace");
      }
      return terminal_traces[static_cast<size_t>(terminal_index)];
    case Op::kShift:
      return shift(children[0].replay(terminal_traces), delta_samples);
    case Op::kScale:
      return scale(children[0].replay(terminal_traces), scale_factor);
    case Op::kSuperimposeHalve:
      return scale(
          superimpose(children[0].replay(terminal_traces), children[1].replay(terminal_traces)),
          0.5);
  }
  throw std::logic_error("OutputRecipe: bad op");
}

double scale_cap(const AmplitudeRange& range, const Eigen::VectorXd& b_amp) {
  const double hw_min = range.half_width().minCoeff();
  const double amp_min = b_amp.minCoeff();
  if (!(amp_min > 0.0)) throw std::invalid_argument("scale_cap: b_amp must be positive");
  return hw_min / amp_min * kRoundingShave;
}

double max_scale_for(const Trace& x, const AmplitudeRange& range, double cap) {
  const Eigen::VectorXd hw = range.half_width();
  double s = cap;
  for (Eigen::Index i = 0; i < x.n_dim(); ++i) {
    const double m = x.samples().row(i).cwiseAbs().maxCoeff();
    if (m > 0.0) s = std::min(s, hw(i) / m * kRoundingShave);
  }
  return s;
}

Realization realize(const Program& p, const AmplitudeRange& range, const ProgramSpace& space) {
  if (range.lo.size() != space.n_dim) {
    throw std::invalid_argument("realize: amplitude range dimension mismatch");
  }
  const double cap = scale_cap(range, space.b_amp);
  std::vector<Trace> terminal_inputs;
  Trace bottom_up = Trace::zeros(1, 1, 1.0);
  OutputRecipe recipe =
      build_recipe(p.root(), range, space, cap, terminal_inputs, bottom_up);
  Trace input = recipe.replay(terminal_inputs);

  const Eigen::VectorXd hw = range.half_width();
  for (Eigen::Index i = 0; i < input.n_dim(); ++i) {
    if (input.samples().row(i).cwiseAbs().maxCoeff() > hw(i)) {
      throw std::invalid_argument("realize: input left the amplitude range");
    }
  }
  return Realization{std::move(input), std::move(terminal_inputs), std::move(recipe)};
}

Trace expected_output(const OutputRecipe& recipe, std::span<const Trace> terminal_outputs) {
  return recipe.replay(terminal_outputs);
}

}  // namespace mrf
