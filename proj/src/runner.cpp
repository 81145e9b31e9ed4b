#include "mrfalsify/runner.hpp"

#include "mrfalsify/util.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace mrf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json histogram_to_json(const Histogram& h) {
  return json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

json summary_to_json(const SummaryReport& rep) {
  json j;
  j["count"] = rep.count;
  j["fitness"] = {{"mean", rep.fitness.mean}, {"histogram", histogram_to_json(rep.fitness.histogram)}};
  j["control_error"] = {{"mean", rep.control_error.mean},
                        {"histogram", histogram_to_json(rep.control_error.histogram)}};
  j["mr_falsification"] = {{"mean", rep.mr_falsification.mean},
                           {"histogram", histogram_to_json(rep.mr_falsification.histogram)}};
  j["trivial_failures"] = rep.trivial_failures;
  if (rep.r_squared) {
    j["r_squared_below_threshold"] = *rep.r_squared;
  } else {
    j["r_squared_below_threshold"] = nullptr;
  }
  if (rep.archive_distances) j["archive_distance_histogram"] = histogram_to_json(*rep.archive_distances);
  return j;
}

void write_manifest(const RunConfig& cfg, const std::string& mode, const fs::path& dir) {
  json j;
  j["tool"] = "mrfalsify";
  j["version"] = kToolVersion;
  j["mode"] = mode;
  j["seed"] = cfg.seed;
  j["config"] = config_to_json(cfg);
  std::ofstream os(dir / "manifest.json");
  os << j.dump(2) << '\n';
}

void write_evals_csv(const std::vector<EvalRow>& rows, const fs::path& path) {
  std::ofstream os(path);
  os << "id,fitness,mr_falsification,control_error,executions,program\n";
  for (const EvalRow& r : rows) {
    os << r.id << ',' << format_double(r.fitness) << ',' << format_double(r.mr_falsification)
       << ',' << format_double(r.control_error) << ',' << r.executions << ',' << r.program
       << '\n';
  }
}

void write_generations_csv(const std::vector<GenerationLog>& logs, const fs::path& path) {
  std::ofstream os(path);
  os << "generation,best_fitness,mean_fitness,mean_control_error,mean_mr_falsification,"
        "archive_best,archive_size\n";
  for (const GenerationLog& g : logs) {
    os << g.generation << ',' << format_double(g.best_fitness) << ','
       << format_double(g.mean_fitness) << ',' << format_double(g.mean_control_error) << ','
       << format_double(g.mean_mr_falsification) << ',' << format_double(g.archive_best) << ','
       << g.archive_size << '\n';
  }
}

void write_archive_jsonl(const Archive& archive, const fs::path& path) {
  std::ofstream os(path);
  for (const Individual& m : archive.members()) {
    json j;
    j["program"] = m.program.to_text();
    j["control_error"] = m.result.control_error;
    j["mr_falsification"] = m.result.mr_falsification;
    j["fitness"] = m.result.fitness;
    j["executions"] = m.result.executions_used;
    os << j.dump() << '\n';
  }
}

SummaryReport report_from_result(const SearchResult& result, double error_threshold, int bins) {
  std::vector<double> f, eps, mu;
  for (const EvalRow& r : result.evals) {
    f.push_back(r.fitness);
    eps.push_back(r.control_error);
    mu.push_back(r.mr_falsification);
  }
  SummaryReport rep = summarize(f, eps, mu, error_threshold, bins);
  const std::vector<double> dists = result.archive.pairwise_distances();
  if (!dists.empty()) rep.archive_distances = make_histogram(dists, bins);
  return rep;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

SearchResult run_and_write(const RunConfig& cfg, bool baseline, const fs::path& out_dir,
                           std::optional<int> baseline_count) {
  cfg.validate();
  fs::create_directories(out_dir);

  std::unique_ptr<SutModel> sut = make_sut(cfg);
  if (!cfg.sut.dump_dir.empty()) {
    fs::create_directories(cfg.sut.dump_dir);
    sut->set_dump_dir(cfg.sut.dump_dir);
  }
  const ProgramSpace space = make_space(cfg);
  const SearchConfig scfg = make_search_config(cfg);

  SearchResult result =
      baseline
          ? run_baseline(baseline_count.value_or(scfg.generations * scfg.offspring), scfg,
                         cfg.fitness, space, *sut)
          : run_search(scfg, cfg.fitness, space, *sut);

  if (result.total_executions != sut->executions()) {
    throw std::logic_error("execution accounting mismatch between cache counters and the model");
  }

  write_archive_jsonl(result.archive, out_dir / "archive.jsonl");
  write_evals_csv(result.evals, out_dir / "evals.csv");
  if (!baseline) write_generations_csv(result.generations, out_dir / "generations.csv");
  const SummaryReport rep = report_from_result(result, cfg.fitness.error_threshold, 30);
  {
    json j = summary_to_json(rep);
    j["mode"] = baseline ? "baseline" : "search";
    j["total_executions"] = result.total_executions;
    j["archive_size"] = result.archive.members().size();
    std::ofstream os(out_dir / "report.json");
    os << j.dump(2) << '\n';
  }
  write_manifest(cfg, baseline ? "baseline" : "search", out_dir);
  return result;
}

SeedsSummary run_seed_sweep(const RunConfig& cfg, bool baseline, std::uint64_t seed_from,
                            std::uint64_t seed_to, const fs::path& out_dir,
                            std::optional<int> baseline_count) {
  if (seed_to < seed_from) throw ConfigError("seeds", "range end must not precede its start");
  SeedsSummary summary;
  std::vector<double> eps_means, mu_means;
  for (std::uint64_t s = seed_from; s <= seed_to; ++s) {
    RunConfig run_cfg = cfg;
    run_cfg.seed = s;
    const SearchResult result = run_and_write(
        run_cfg, baseline, out_dir / ("seed_" + std::to_string(s)), baseline_count);
    summary.seeds.push_back(s);
    eps_means.push_back(result.archive.mean_control_error());
    mu_means.push_back(result.archive.mean_mr_falsification());
  }
  summary.mean_control_error = mean_of(eps_means);
  summary.stddev_control_error = stddev_of(eps_means);
  summary.mean_mr_falsification = mean_of(mu_means);
  summary.stddev_mr_falsification = stddev_of(mu_means);

  json j;
  j["seeds"] = summary.seeds;
  j["archive_mean_control_error"] = {{"mean", summary.mean_control_error},
                                     {"stddev", summary.stddev_control_error}};
  j["archive_mean_mr_falsification"] = {{"mean", summary.mean_mr_falsification},
                                        {"stddev", summary.stddev_mr_falsification}};
  std::ofstream os(out_dir / "seeds_summary.json");
  os << j.dump(2) << '\n';
  return summary;
}

std::vector<double> tune_b_values() { return {1.5, std::exp(1.0), 10.0}; }

std::vector<double> tune_c_values(double error_threshold) {
  return {0.5 / error_threshold, 1.0 / error_threshold, 5.0 / error_threshold};
}

TuneSelection select_tune_cell(const std::vector<TuneCell>& cells, double error_threshold,
                               double near_fraction) {
  TuneSelection sel;
  double best_mu = -1.0;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    const TuneCell& cell = cells[static_cast<size_t>(i)];
    const bool admissible = cell.mean_control_error <= error_threshold &&
                            cell.mean_control_error >= near_fraction * error_threshold;
    if (admissible && cell.mean_mr_falsification > best_mu) {
      best_mu = cell.mean_mr_falsification;
      sel.index = i;
    }
  }
  if (sel.index >= 0) return sel;

  sel.fallback = true;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    const double gap = std::abs(cells[static_cast<size_t>(i)].mean_control_error - error_threshold);
    if (gap < best_gap) {
      best_gap = gap;
      sel.index = i;
    }
  }
  return sel;
}

TuneReport run_tune(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  TuneReport report;
  const std::vector<double> bs = tune_b_values();
  const std::vector<double> cs = tune_c_values(cfg.fitness.error_threshold);
  for (double c : cs) {
    for (double b : bs) {
      RunConfig cell_cfg = cfg;
      cell_cfg.fitness.b = b;
      cell_cfg.fitness.c = c;
      std::unique_ptr<SutModel> sut = make_sut(cell_cfg);
      const SearchResult result = run_search(make_search_config(cell_cfg), cell_cfg.fitness,
                                             make_space(cell_cfg), *sut);
      report.cells.push_back(TuneCell{b, c, result.archive.mean_control_error(),
                                      result.archive.mean_mr_falsification()});
    }
  }
  report.selection = select_tune_cell(report.cells, cfg.fitness.error_threshold);

  std::ofstream csv(out_dir / "tune.csv");
  csv << "b,c,archive_mean_control_error,archive_mean_mr_falsification,selected\n";
  for (int i = 0; i < static_cast<int>(report.cells.size()); ++i) {
    const TuneCell& cell = report.cells[static_cast<size_t>(i)];
    csv << format_double(cell.b) << ',' << format_double(cell.c) << ','
        << format_double(cell.mean_control_error) << ','
        << format_double(cell.mean_mr_falsification) << ','
        << (i == report.selection.index ? 1 : 0) << '\n';
  }
  json j;
  j["cells"] = json::array();
  for (const TuneCell& cell : report.cells) {
    j["cells"].push_back({{"b", cell.b},
                          {"c", cell.c},
                          {"archive_mean_control_error", cell.mean_control_error},
                          {"archive_mean_mr_falsification", cell.mean_mr_falsification}});
  }
  j["selected_index"] = report.selection.index;
  j["selection_is_fallback"] = report.selection.fallback;
  std::ofstream os(out_dir / "tune.json");
  os << j.dump(2) << '\n';
  return report;
}

EvalSet load_evals_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open evals file '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line) || line.rfind("id,fitness,", 0) != 0) {
    throw std::runtime_error("'" + path.string() + "' is not an evals.csv file");
  }
  EvalSet set;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, f, mu, eps, ex, prog;
    std::getline(row, id, ',');
    std::getline(row, f, ',');
    std::getline(row, mu, ',');
    std::getline(row, eps, ',');
    std::getline(row, ex, ',');
    std::getline(row, prog);
    set.fitness.push_back(std::stod(f));
    set.mr_falsification.push_back(std::stod(mu));
    set.control_error.push_back(std::stod(eps));
    set.programs.push_back(prog);
  }
  if (set.fitness.empty()) throw std::runtime_error("'" + path.string() + "' holds no evaluations");
  return set;
}

json analyze_files(const std::vector<fs::path>& paths, double error_threshold, int bins,
                   std::optional<double> clip_hi) {
  if (paths.empty() || paths.size() > 2) {
    throw std::runtime_error("analyze expects one or two evals.csv files");
  }
  json j;
  std::vector<EvalSet> sets;
  for (const fs::path& p : paths) {
    sets.push_back(load_evals_csv(p));
    const EvalSet& s = sets.back();
    j["inputs"].push_back(p.string());
    j["summaries"].push_back(summary_to_json(summarize(
        s.fitness, s.control_error, s.mr_falsification, error_threshold, bins, clip_hi)));
  }
  if (sets.size() == 2) {
    auto compare = [&](const std::vector<double>& a, const std::vector<double>& b) {
      const MannWhitneyResult r = mann_whitney_u(a, b);
      return json{{"u", r.u}, {"p", r.p}};
    };
    j["mann_whitney"] = {
        {"fitness", compare(sets[0].fitness, sets[1].fitness)},
        {"mr_falsification", compare(sets[0].mr_falsification, sets[1].mr_falsification)},
        {"control_error", compare(sets[0].control_error, sets[1].control_error)}};
  }
  return j;
}

int run_replay(const RunConfig& cfg, const fs::path& archive_path, int index,
               const fs::path& out_dir) {
  cfg.validate();
  std::ifstream is(archive_path);
  if (!is) throw std::runtime_error("cannot open archive '" + archive_path.string() + "'");
  std::string line;
  json entry;
  int row = 0;
  bool found = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row++ == index) {
      entry = json::parse(line);
      found = true;
      break;
    }
  }
  if (!found) throw std::runtime_error("archive has no entry " + std::to_string(index));

  const ProgramSpace space = make_space(cfg);
  const Program program = Program::parse(entry.at("program").get<std::string>(), space);
  std::unique_ptr<SutModel> sut = make_sut(cfg);
  ExecutionCache cache;
  const EvalResult result = assess(program, *sut, cache, cfg.fitness, space);
  if (result.diverged) throw std::runtime_error("replayed execution diverged");

  fs::create_directories(out_dir);
  {
    std::ofstream os(out_dir / "input.csv");
    write_csv(*result.input, os);
  }
  {
    std::ofstream os(out_dir / "expected.csv");
    write_csv(*result.expected, os);
  }
  {
    std::ofstream os(out_dir / "actual.csv");
    write_csv(*result.actual, os);
  }

  const double eps_stored = entry.at("control_error").get<double>();
  const double mu_stored = entry.at("mr_falsification").get<double>();
  const double eps_diff = std::abs(result.control_error - eps_stored);
  const double mu_diff = std::abs(result.mr_falsification - mu_stored);
  if (eps_diff > 1e-9 || mu_diff > 1e-9) {
    std::cerr << "replay mismatch:\n"
              << "  control_error stored " << format_double(eps_stored) << " recomputed "
              << format_double(result.control_error) << " (|diff| " << format_double(eps_diff)
              << ")\n"
              << "  mr_falsification stored " << format_double(mu_stored) << " recomputed "
              << format_double(result.mr_falsification) << " (|diff| " << format_double(mu_diff)
              << ")\n";
    return 2;
  }
  return 0;
}

}  // namespace mrf
