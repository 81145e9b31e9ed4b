#pragma once

#include "mrfalsify/program.hpp"
#include "mrfalsify/realize.hpp"
#include "mrfalsify/sut.hpp"
#include "mrfalsify/trace.hpp"

#include <optional>

namespace mrf {

/// Coefficients of the penalized fitness F = mu_mr / b^(c * (eps_c - eps_th)).
struct FitnessConfig {
  double b{2.718281828459045};
  double c{6.66};
  double error_threshold{0.15};

  void validate() const;
};

struct EvalResult {
  std::optional<Trace> input;     // realized follow-up input (deviation)
  std::optional<Trace> expected;  // expected output via the MR recipe
  std::optional<Trace> actual;    // measured deviation output
  double control_error{0.0};
  double mr_falsification{0.0};
  double fitness{0.0};
  int executions_used{0};
  bool diverged{false};
};

/// Strictly increasing in mu_mr, strictly decreasing in eps_c.
double fitness_value(double mu_mr, double eps_c, const FitnessConfig& cfg);

/// Realizes the program, runs each terminal input once through the cache,
/// runs the follow-up input directly (so executions are exactly
/// distinct-terminals + 1), builds the expected output and scores the result.
/// A diverged execution yields fitness 0 with the diverged flag set.
EvalResult assess(const Program& p, SutModel& sut, ExecutionCache& cache,
                  const FitnessConfig& cfg, const ProgramSpace& space);

}  // namespace mrf
