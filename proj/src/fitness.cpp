#include "mrfalsify/fitness.hpp"

#include <cmath>
#include <stdexcept>

namespace mrf {

void FitnessConfig::validate() const {
  if (!(b > 1.0)) throw std::invalid_argument("fitness.b must be greater than 1");
  if (!(c > 0.0)) throw std::invalid_argument("fitness.c must be positive");
  if (!(error_threshold > 0.0)) {
    throw std::invalid_argument("fitness.error_threshold must be positive");
  }
}

double fitness_value(double mu_mr, double eps_c, const FitnessConfig& cfg) {
  return mu_mr / std::pow(cfg.b, cfg.c * (eps_c - cfg.error_threshold));
}

EvalResult assess(const Program& p, SutModel& sut, ExecutionCache& cache,
                  const FitnessConfig& cfg, const ProgramSpace& space) {
  Realization realization = realize(p, sut.range(), space);

  EvalResult result;
  result.input = realization.input;

  const long long executed_before = cache.executions();
  std::vector<Trace> terminal_outputs;
  terminal_outputs.reserve(realization.terminal_inputs.size());
  for (const Trace& terminal : realization.terminal_inputs) {
    std::optional<Trace> out = cache.cached_execute(sut, terminal);
    if (!out) {
      result.diverged = true;
      result.executions_used = static_cast<int>(cache.executions() - executed_before);
      return result;
    }
    terminal_outputs.push_back(std::move(*out));
  }

  // The follow-up test is always executed, never served from the cache, to
  // keep the distinct-terminals + 1 accounting exact even when a program
  // realizes an input identical to one of its own terminals.
  std::optional<Trace> actual = run_test(sut, realization.input);
  result.executions_used = static_cast<int>(cache.executions() - executed_before) + 1;
  if (!actual) {
    result.diverged = true;
    return result;
  }

  Trace expected = expected_output(realization.recipe, terminal_outputs);
  result.control_error = distance(realization.input, *actual);
  result.mr_falsification = distance(*actual, expected);
  result.fitness = fitness_value(result.mr_falsification, result.control_error, cfg);
  result.expected = std::move(expected);
  result.actual = std::move(actual);
  return result;
}

}  // namespace mrf
