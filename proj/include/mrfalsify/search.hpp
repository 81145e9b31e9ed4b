#pragma once

#include "mrfalsify/fitness.hpp"
#include "mrfalsify/program.hpp"
#include "mrfalsify/sut.hpp"

#include <string>
#include <vector>

namespace mrf {

struct SearchConfig {
  int population{50};
  int offspring{80};
  int generations{40};
  double crossover_rate{0.35};
  double mutation_rate{0.35};
  int tournament_size{2};
  double similarity_threshold{0.2};
  std::uint64_t seed{1};

  void validate() const;
};

struct Individual {
  Program program;
  EvalResult result;
};

/// Similarity-deduplicated collection of the fittest individuals. A
/// newcomer enters only if its realized input lies at least threshold away
/// (average Euclidean distance) from every member; otherwise the incumbent
/// stays, even when the newcomer scores higher.
class Archive {
 public:
  explicit Archive(double threshold) : threshold_(threshold) {}

  bool update(const Individual& candidate);
  const std::vector<Individual>& members() const { return members_; }
  double threshold() const { return threshold_; }
  double best_fitness() const;
  double mean_control_error() const;
  double mean_mr_falsification() const;
  /// Pairwise realized-input distances, all >= threshold by construction.
  std::vector<double> pairwise_distances() const;

 private:
  double threshold_;
  std::vector<Individual> members_;
};

struct GenerationLog {
  int generation{0};
  double best_fitness{0};
  double mean_fitness{0};
  double mean_control_error{0};
  double mean_mr_falsification{0};
  double archive_best{0};
  int archive_size{0};
};

struct EvalRow {
  long id{0};
  double fitness{0};
  double mr_falsification{0};
  double control_error{0};
  int executions{0};
  bool diverged{false};
  std::string program;
};

struct SearchResult {
  Archive archive{0.0};
  std::vector<GenerationLog> generations;
  std::vector<EvalRow> evals;
  long long total_executions{0};
};

/// Tournament survival with the duplicate rule: a winner whose realized
/// input is within threshold of an already selected member is discarded and
/// replaced by a uniformly random archive member. With an empty archive the
/// duplicate is kept so the population count stays intact.
std::vector<Individual> survival_with_diversity(const std::vector<Individual>& offspring,
                                                int count, const Archive& archive,
                                                double threshold, int tournament_size, Rng& rng);

/// (mu, lambda) evolutionary loop: random initial population, then per
/// generation breed lambda offspring (crossover / mutation / clone of
/// tournament winners), assess, update the archive and select survivors
/// from the offspring only.
SearchResult run_search(const SearchConfig& cfg, const FitnessConfig& fcfg,
                        const ProgramSpace& space, SutModel& sut);

/// Random-generation baseline: n independent programs from the same
/// generator, assessed without any selection pressure.
SearchResult run_baseline(int n, const SearchConfig& cfg, const FitnessConfig& fcfg,
                          const ProgramSpace& space, SutModel& sut);

}  // namespace mrf
