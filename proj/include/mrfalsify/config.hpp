#pragma once

#include "mrfalsify/fitness.hpp"
#include "mrfalsify/program.hpp"
#include "mrfalsify/search.hpp"
#include "mrfalsify/sut.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

namespace mrf {

/// Configuration problem with the offending field spelled out.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using PlantParams = std::variant<Lti2Params, Sat2Params, Quad1dParams, Engine1Params>;

struct SutConfig {
  std::string plant{"sat2"};  // lti2 | sat2 | quad1d | engine1
  Eigen::Index n_dim{2};
  double dt{0.02};
  double warm_up{3.0};
  PlantParams params{Sat2Params{}};
  std::string dump_dir;  // optional per-execution trace dump
};

struct SearchParams {
  int population{50};
  int offspring{80};
  int generations{40};
  double crossover_rate{0.35};
  double mutation_rate{0.35};
  int tournament_size{2};
  int init_depth_min{4};
  int init_depth_max{8};
  int mutation_depth_min{2};
  int mutation_depth_max{4};
  int max_nodes{300};
};

struct RunConfig {
  SutConfig sut;
  double test_duration{10.0};  // measured window, excluding warm-up
  Eigen::VectorXd b_amp;
  AmplitudeRange amplitude_range;
  FitnessConfig fitness;
  double similarity_threshold{0.2};
  SearchParams search;
  std::uint64_t seed{1};
  std::string out_dir{"out"};

  void validate() const;
};

/// Built-in defaults per plant, mirroring the drone-style and engine-style
/// parameter tables the subjects are modelled after.
RunConfig default_config(const std::string& plant);

/// JSON with // comments allowed.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

ProgramSpace make_space(const RunConfig& cfg);
std::unique_ptr<SutModel> make_sut(const RunConfig& cfg);
SearchConfig make_search_config(const RunConfig& cfg);

/// Multiplies generations and offspring count for desk-scale runs; the
/// population is clamped so it never exceeds the offspring count.
RunConfig apply_budget_scale(RunConfig cfg, double factor);

}  // namespace mrf
