#pragma once

#include "mrfalsify/program.hpp"
#include "mrfalsify/trace.hpp"

#include <span>
#include <vector>

namespace mrf {

/// Recorded MR-application sequence of a realized program. Replaying it over
/// the actual outputs of the terminal traces yields the expected output;
/// replaying it over the terminal inputs themselves reproduces the follow-up
/// input exactly (both paths run the identical operations).
struct OutputRecipe {
  enum class Op { kLeaf, kShift, kScale, kSuperimposeHalve };

  Op op{Op::kLeaf};
  int terminal_index{0};    // kLeaf
  int delta_samples{0};     // kShift
  double scale_factor{1.0}; // kScale, the resolved actual scaling value
  std::vector<OutputRecipe> children;

  Trace replay(std::span<const Trace> terminal_traces) const;
};

struct Realization {
  Trace input;                        // deviation coordinates
  std::vector<Trace> terminal_inputs; // one per terminal node, preorder
  OutputRecipe recipe;
};

/// Largest scaling that keeps |s * x| within the per-dimension half-widths,
/// additionally capped by cap (the ratio of the smallest allowed amplitude
/// to the smallest initial-trace amplitude). A subtree that is identically
/// zero has no amplitude constraint, so the cap alone applies.
double max_scale_for(const Trace& x, const AmplitudeRange& range, double cap);

/// Cap value used by realize: min(half_width) / min(b_amp), shaved by 1e-12
/// so scaled traces stay inside the range under floating-point rounding.
double scale_cap(const AmplitudeRange& range, const Eigen::VectorXd& b_amp);

/// Bottom-up evaluation in deviation coordinates. AS maps its alpha in [0,1]
/// linearly onto [0, max_scale_for(subtree)]; SP superimposes and halves; TS
/// shifts right on the sample grid. Throws std::invalid_argument if the
/// realized input leaves the range (cannot happen for grammar-valid input).
Realization realize(const Program& p, const AmplitudeRange& range, const ProgramSpace& space);

/// Replays the recipe over one actual-output trace per terminal node.
Trace expected_output(const OutputRecipe& recipe, std::span<const Trace> terminal_outputs);

}  // namespace mrf
