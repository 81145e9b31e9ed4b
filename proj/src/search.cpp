#include "mrfalsify/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrf {

void SearchConfig::validate() const {
  if (population < 1) throw std::invalid_argument("search.population must be at least 1");
  if (offspring < population) {
    throw std::invalid_argument("search.offspring must be at least the population size");
  }
  if (generations < 0) throw std::invalid_argument("search.generations must be non-negative");
  if (crossover_rate < 0.0 || mutation_rate < 0.0 ||
      crossover_rate + mutation_rate > 1.0) {
    throw std::invalid_argument("search crossover_rate + mutation_rate must stay within [0, 1]");
  }
  if (tournament_size < 1) throw std::invalid_argument("search.tournament_size must be at least 1");
  if (similarity_threshold < 0.0) {
    throw std::invalid_argument("search.similarity_threshold must be non-negative");
  }
}

bool Archive::update(const Individual& candidate) {
  if (candidate.result.diverged || !candidate.result.input) return false;
  for (const Individual& member : members_) {
    if (distance(*candidate.result.input, *member.result.input) < threshold_) return false;
  }
  members_.push_back(candidate);
  return true;
}

double Archive::best_fitness() const {
  double best = 0.0;
  for (const Individual& m : members_) best = std::max(best, m.result.fitness);
  return best;
}

double Archive::mean_control_error() const {
  if (members_.empty()) return 0.0;
  double s = 0.0;
  for (const Individual& m : members_) s += m.result.control_error;
  return s / static_cast<double>(members_.size());
}

double Archive::mean_mr_falsification() const {
  if (members_.empty()) return 0.0;
  double s = 0.0;
  for (const Individual& m : members_) s += m.result.mr_falsification;
  return s / static_cast<double>(members_.size());
}

std::vector<double> Archive::pairwise_distances() const {
  std::vector<double> out;
  for (size_t i = 0; i < members_.size(); ++i) {
    for (size_t j = i + 1; j < members_.size(); ++j) {
      out.push_back(distance(*members_[i].result.input, *members_[j].result.input));
    }
  }
  return out;
}

namespace {

const Individual& tournament(const std::vector<Individual>& pool, int size, Rng& rng) {
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  const Individual* best = &pool[pick(rng)];
  for (int i = 1; i < size; ++i) {
    const Individual& contender = pool[pick(rng)];
    if (contender.result.fitness > best->result.fitness) best = &contender;
  }
  return *best;
}

struct RunState {
  const SearchConfig& cfg;
  const FitnessConfig& fcfg;
  const ProgramSpace& space;
  SutModel& sut;
  SearchResult result;
  long next_id = 0;

  Individual assess_program(Program program) {
    ExecutionCache cache;  // fresh per assessment: executions == terminals + 1
    EvalResult r = assess(program, sut, cache, fcfg, space);
    result.total_executions += r.executions_used;
    result.evals.push_back(EvalRow{next_id++, r.fitness, r.mr_falsification, r.control_error,
                                   r.executions_used, r.diverged, program.to_text()});
    return Individual{std::move(program), std::move(r)};
  }

  GenerationLog log_generation(int generation, const std::vector<Individual>& batch) {
    GenerationLog log;
    log.generation = generation;
    double f = 0.0, eps = 0.0, mu = 0.0, best = 0.0;
    for (const Individual& ind : batch) {
      f += ind.result.fitness;
      eps += ind.result.control_error;
      mu += ind.result.mr_falsification;
      best = std::max(best, ind.result.fitness);
    }
    const auto n = static_cast<double>(batch.size());
    log.best_fitness = best;
    log.mean_fitness = f / n;
    log.mean_control_error = eps / n;
    log.mean_mr_falsification = mu / n;
    log.archive_best = result.archive.best_fitness();
    log.archive_size = static_cast<int>(result.archive.members().size());
    return log;
  }
};

}  // namespace

std::vector<Individual> survival_with_diversity(const std::vector<Individual>& offspring,
                                                int count, const Archive& archive,
                                                double threshold, int tournament_size, Rng& rng) {
  std::vector<Individual> selected;
  selected.reserve(static_cast<size_t>(count));
  while (static_cast<int>(selected.size()) < count) {
    const Individual& winner = tournament(offspring, tournament_size, rng);
    bool duplicate = false;
    if (winner.result.input) {
      for (const Individual& s : selected) {
        if (s.result.input && distance(*winner.result.input, *s.result.input) < threshold) {
          duplicate = true;
          break;
        }
      }
    }
    if (duplicate && !archive.members().empty()) {
      std::uniform_int_distribution<size_t> pick(0, archive.members().size() - 1);
      selected.push_back(archive.members()[pick(rng)]);
    } else {
      selected.push_back(winner);
    }
  }
  return selected;
}

SearchResult run_search(const SearchConfig& cfg, const FitnessConfig& fcfg,
                        const ProgramSpace& space, SutModel& sut) {
  cfg.validate();
  fcfg.validate();
  Rng rng(cfg.seed);

  RunState state{cfg, fcfg, space, sut, SearchResult{Archive(cfg.similarity_threshold), {}, {}, 0}, 0};

  std::vector<Individual> population;
  population.reserve(static_cast<size_t>(cfg.population));
  for (int i = 0; i < cfg.population; ++i) {
    population.push_back(state.assess_program(generate_random(space, rng)));
    state.result.archive.update(population.back());
  }
  state.result.generations.push_back(state.log_generation(0, population));

  double prev_archive_best = state.result.archive.best_fitness();
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(static_cast<size_t>(cfg.offspring));
    while (static_cast<int>(offspring.size()) < cfg.offspring) {
      const double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      if (roll < cfg.crossover_rate) {
        const Program& a = tournament(population, cfg.tournament_size, rng).program;
        const Program& b = tournament(population, cfg.tournament_size, rng).program;
        auto [c1, c2] = crossover(a, b, space, rng);
        offspring.push_back(state.assess_program(std::move(c1)));
        if (static_cast<int>(offspring.size()) < cfg.offspring) {
          offspring.push_back(state.assess_program(std::move(c2)));
        }
      } else if (roll < cfg.crossover_rate + cfg.mutation_rate) {
        const Program& a = tournament(population, cfg.tournament_size, rng).program;
        offspring.push_back(state.assess_program(mutate(a, space, rng)));
      } else {
        // Reproduction: the clone's result is already known by determinism,
        // so no new test is executed for it.
        offspring.push_back(tournament(population, cfg.tournament_size, rng));
      }
    }
    for (const Individual& child : offspring) state.result.archive.update(child);

    state.result.generations.push_back(state.log_generation(gen, offspring));
    const double archive_best = state.result.archive.best_fitness();
    if (archive_best + 1e-15 < prev_archive_best) {
      throw std::logic_error("archive best fitness decreased");
    }
    prev_archive_best = archive_best;

    population = survival_with_diversity(offspring, cfg.population, state.result.archive,
                                         cfg.similarity_threshold, cfg.tournament_size, rng);
  }
  return std::move(state.result);
}

SearchResult run_baseline(int n, const SearchConfig& cfg, const FitnessConfig& fcfg,
                          const ProgramSpace& space, SutModel& sut) {
  if (n < 1) throw std::invalid_argument("baseline count must be at least 1");
  fcfg.validate();
  Rng rng(cfg.seed);
  RunState state{cfg, fcfg, space, sut, SearchResult{Archive(cfg.similarity_threshold), {}, {}, 0}, 0};
  std::vector<Individual> batch;
  batch.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    batch.push_back(state.assess_program(generate_random(space, rng)));
    state.result.archive.update(batch.back());
  }
  state.result.generations.push_back(state.log_generation(0, batch));
  return std::move(state.result);
}

}  // namespace mrf
