#include "mrfalsify/config.hpp"

#include <cmath>
#include <fstream>

namespace mrf {

namespace {

using nlohmann::json;

double get_num(const json& j, const std::string& ctx, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(ctx + key, "must be a number");
  return j.at(key).get<double>();
}

std::uint64_t get_u64(const json& j, const std::string& ctx, const std::string& key,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer()) {
    throw ConfigError(ctx + key, "must be a non-negative integer");
  }
  return j.at(key).get<std::uint64_t>();
}

int get_int(const json& j, const std::string& ctx, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(ctx + key, "must be an integer");
  return j.at(key).get<int>();
}

Eigen::VectorXd get_vec(const json& j, const std::string& ctx, const std::string& key,
                        const Eigen::VectorXd& fallback) {
  if (!j.contains(key)) return fallback;
  const json& arr = j.at(key);
  if (!arr.is_array() || arr.empty()) throw ConfigError(ctx + key, "must be a non-empty array");
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError(ctx + key, "must contain numbers only");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

PidGains pid_from_json(const json& j, const std::string& ctx, const PidGains& fallback) {
  PidGains g = fallback;
  g.kp = get_num(j, ctx, "kp", g.kp);
  g.ki = get_num(j, ctx, "ki", g.ki);
  g.kd = get_num(j, ctx, "kd", g.kd);
  return g;
}

json pid_to_json(const PidGains& g) { return json{{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}}; }

Lti2Params lti2_from_json(const json& j, const std::string& ctx, Lti2Params base) {
  base.mass = get_num(j, ctx, "mass", base.mass);
  base.stiffness = get_num(j, ctx, "stiffness", base.stiffness);
  base.damping = get_num(j, ctx, "damping", base.damping);
  if (j.contains("pid")) base.pid = pid_from_json(j.at("pid"), ctx + "pid.", base.pid);
  base.noise_amp = get_num(j, ctx, "noise_amp", base.noise_amp);
  base.noise_seed = get_u64(j, ctx, "noise_seed", base.noise_seed);
  return base;
}

json lti2_to_json(const Lti2Params& p) {
  return json{{"mass", p.mass},           {"stiffness", p.stiffness},
              {"damping", p.damping},     {"pid", pid_to_json(p.pid)},
              {"noise_amp", p.noise_amp}, {"noise_seed", p.noise_seed}};
}

PlantParams params_from_json(const std::string& plant, const json& j) {
  const std::string ctx = "sut.params.";
  if (plant == "lti2") return lti2_from_json(j, ctx, Lti2Params{});
  if (plant == "sat2") {
    Sat2Params p;
    p.base = lti2_from_json(j, ctx, p.base);
    p.force_limit = get_num(j, ctx, "force_limit", p.force_limit);
    p.rate_limit = get_num(j, ctx, "rate_limit", p.rate_limit);
    return p;
  }
  if (plant == "quad1d") {
    Quad1dParams p;
    p.mass = get_num(j, ctx, "mass", p.mass);
    p.gravity = get_num(j, ctx, "gravity", p.gravity);
    p.thrust_limit = get_num(j, ctx, "thrust_limit", p.thrust_limit);
    p.outer_kp = get_num(j, ctx, "outer_kp", p.outer_kp);
    if (j.contains("inner")) p.inner = pid_from_json(j.at("inner"), ctx + "inner.", p.inner);
    p.noise_amp = get_num(j, ctx, "noise_amp", p.noise_amp);
    p.noise_seed = get_u64(j, ctx, "noise_seed", p.noise_seed);
    return p;
  }
  if (plant == "engine1") {
    Engine1Params p;
    p.gain = get_num(j, ctx, "gain", p.gain);
    p.time_constant = get_num(j, ctx, "time_constant", p.time_constant);
    p.delay = get_num(j, ctx, "delay", p.delay);
    p.throttle_limit = get_num(j, ctx, "throttle_limit", p.throttle_limit);
    if (j.contains("pid")) p.pid = pid_from_json(j.at("pid"), ctx + "pid.", p.pid);
    p.noise_amp = get_num(j, ctx, "noise_amp", p.noise_amp);
    p.noise_seed = get_u64(j, ctx, "noise_seed", p.noise_seed);
    return p;
  }
  throw ConfigError("sut.plant", "unknown plant '" + plant + "'");
}

json params_to_json(const PlantParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Lti2Params>) {
          return lti2_to_json(p);
        } else if constexpr (std::is_same_v<T, Sat2Params>) {
          json j = lti2_to_json(p.base);
          j["force_limit"] = p.force_limit;
          j["rate_limit"] = p.rate_limit;
          return j;
        } else if constexpr (std::is_same_v<T, Quad1dParams>) {
          return json{{"mass", p.mass},
                      {"gravity", p.gravity},
                      {"thrust_limit", p.thrust_limit},
                      {"outer_kp", p.outer_kp},
                      {"inner", pid_to_json(p.inner)},
                      {"noise_amp", p.noise_amp},
                      {"noise_seed", p.noise_seed}};
        } else {
          return json{{"gain", p.gain},
                      {"time_constant", p.time_constant},
                      {"delay", p.delay},
                      {"throttle_limit", p.throttle_limit},
                      {"pid", pid_to_json(p.pid)},
                      {"noise_amp", p.noise_amp},
                      {"noise_seed", p.noise_seed}};
        }
      },
      params);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void RunConfig::validate() const {
  if (sut.plant != "lti2" && sut.plant != "sat2" && sut.plant != "quad1d" &&
      sut.plant != "engine1") {
    throw ConfigError("sut.plant", "unknown plant '" + sut.plant + "'");
  }
  if (!(sut.dt > 0.0)) throw ConfigError("sut.dt", "must be positive");
  if (sut.warm_up < 0.0) throw ConfigError("sut.warm_up", "must be non-negative");
  if (!(test_duration > 0.0)) throw ConfigError("test_duration", "must be positive");
  if (!(sut.warm_up < test_duration)) {
    throw ConfigError("sut.warm_up", "must be shorter than test_duration");
  }
  if (sut.n_dim < 1) throw ConfigError("sut.n_dim", "must be at least 1");
  if ((sut.plant == "quad1d" || sut.plant == "engine1") && sut.n_dim != 1) {
    throw ConfigError("sut.n_dim", "must be 1 for this plant");
  }
  try {
    amplitude_range.validate();
  } catch (const std::exception& e) {
    throw ConfigError("amplitude_range", e.what());
  }
  if (amplitude_range.lo.size() != sut.n_dim) {
    throw ConfigError("amplitude_range", "dimension count must match sut.n_dim");
  }
  if (b_amp.size() != sut.n_dim) throw ConfigError("b_amp", "dimension count must match sut.n_dim");
  const Eigen::VectorXd hw = amplitude_range.half_width();
  for (Eigen::Index i = 0; i < b_amp.size(); ++i) {
    if (!(b_amp(i) > 0.0)) throw ConfigError("b_amp", "entries must be positive");
    if (b_amp(i) > hw(i)) {
      throw ConfigError("b_amp", "entries must not exceed the amplitude range half-width");
    }
  }
  try {
    fitness.validate();
  } catch (const std::exception& e) {
    throw ConfigError("fitness", e.what());
  }
  if (similarity_threshold < 0.0) throw ConfigError("similarity_threshold", "must be non-negative");
  if (search.population < 1) throw ConfigError("search.population", "must be at least 1");
  if (search.offspring < search.population) {
    throw ConfigError("search.offspring", "must be at least search.population");
  }
  if (search.generations < 0) throw ConfigError("search.generations", "must be non-negative");
  if (search.crossover_rate < 0.0 || search.mutation_rate < 0.0 ||
      search.crossover_rate + search.mutation_rate > 1.0) {
    throw ConfigError("search.crossover_rate", "rates must be non-negative and sum to at most 1");
  }
  if (search.tournament_size < 1) throw ConfigError("search.tournament_size", "must be at least 1");
  if (search.init_depth_min < 1 || search.init_depth_max < search.init_depth_min) {
    throw ConfigError("search.init_depth", "must satisfy 1 <= min <= max");
  }
  if (search.mutation_depth_min < 1 || search.mutation_depth_max < search.mutation_depth_min) {
    throw ConfigError("search.mutation_depth", "must satisfy 1 <= min <= max");
  }
  if (search.max_nodes < 3) throw ConfigError("search.max_nodes", "must be at least 3");

  // Plant parameter sanity; construction re-checks but this names the field.
  try {
    make_sut(*this);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("sut.params", e.what());
  }
}

RunConfig default_config(const std::string& plant) {
  RunConfig cfg;
  cfg.sut.plant = plant;
  if (plant == "lti2" || plant == "sat2") {
    cfg.sut.n_dim = 2;
    cfg.sut.dt = 0.02;
    cfg.sut.warm_up = 3.0;
    cfg.test_duration = 10.0;
    cfg.b_amp = Eigen::VectorXd::Constant(2, 0.2);
    cfg.amplitude_range = {Eigen::VectorXd::Constant(2, -2.0), Eigen::VectorXd::Constant(2, 2.0)};
    cfg.fitness = {std::exp(1.0), 6.66, 0.15};
    cfg.similarity_threshold = 0.2;
    cfg.sut.params = plant == "lti2" ? PlantParams{Lti2Params{}} : PlantParams{Sat2Params{}};
  } else if (plant == "quad1d") {
    cfg.sut.n_dim = 1;
    cfg.sut.dt = 0.02;
    cfg.sut.warm_up = 3.0;
    cfg.test_duration = 10.0;
    cfg.b_amp = Eigen::VectorXd::Constant(1, 0.2);
    cfg.amplitude_range = {Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 1.2)};
    cfg.fitness = {std::exp(1.0), 6.66, 0.15};
    cfg.similarity_threshold = 0.2;
    cfg.sut.params = Quad1dParams{};
  } else if (plant == "engine1") {
    cfg.sut.n_dim = 1;
    cfg.sut.dt = 0.05;
    cfg.sut.warm_up = 1.5;
    cfg.test_duration = 50.0;
    cfg.b_amp = Eigen::VectorXd::Constant(1, 500.0);
    cfg.amplitude_range = {Eigen::VectorXd::Constant(1, 1200.0),
                           Eigen::VectorXd::Constant(1, 6000.0)};
    cfg.fitness = {1.5, 0.066, 75.0};
    cfg.similarity_threshold = 300.0;
    cfg.sut.params = Engine1Params{};
  } else {
    throw ConfigError("sut.plant", "unknown plant '" + plant + "'");
  }
  return cfg;
}

RunConfig config_from_json(const nlohmann::json& j) {
  const std::string plant =
      j.contains("sut") && j.at("sut").contains("plant") ? j.at("sut").at("plant").get<std::string>()
                                                        : "sat2";
  RunConfig cfg = default_config(plant);
  if (j.contains("sut")) {
    const json& s = j.at("sut");
    cfg.sut.n_dim = get_int(s, "sut.", "n_dim", static_cast<int>(cfg.sut.n_dim));
    cfg.sut.dt = get_num(s, "sut.", "dt", cfg.sut.dt);
    cfg.sut.warm_up = get_num(s, "sut.", "warm_up", cfg.sut.warm_up);
    if (s.contains("params")) cfg.sut.params = params_from_json(plant, s.at("params"));
    if (s.contains("dump_dir")) cfg.sut.dump_dir = s.at("dump_dir").get<std::string>();
  }
  cfg.test_duration = get_num(j, "", "test_duration", cfg.test_duration);
  cfg.b_amp = get_vec(j, "", "b_amp", cfg.b_amp);
  if (j.contains("amplitude_range")) {
    const json& r = j.at("amplitude_range");
    cfg.amplitude_range.lo = get_vec(r, "amplitude_range.", "lo", cfg.amplitude_range.lo);
    cfg.amplitude_range.hi = get_vec(r, "amplitude_range.", "hi", cfg.amplitude_range.hi);
  }
  if (j.contains("fitness")) {
    const json& f = j.at("fitness");
    cfg.fitness.b = get_num(f, "fitness.", "b", cfg.fitness.b);
    cfg.fitness.c = get_num(f, "fitness.", "c", cfg.fitness.c);
    cfg.fitness.error_threshold =
        get_num(f, "fitness.", "error_threshold", cfg.fitness.error_threshold);
  }
  cfg.similarity_threshold = get_num(j, "", "similarity_threshold", cfg.similarity_threshold);
  if (j.contains("search")) {
    const json& s = j.at("search");
    cfg.search.population = get_int(s, "search.", "population", cfg.search.population);
    cfg.search.offspring = get_int(s, "search.", "offspring", cfg.search.offspring);
    cfg.search.generations = get_int(s, "search.", "generations", cfg.search.generations);
    cfg.search.crossover_rate = get_num(s, "search.", "crossover_rate", cfg.search.crossover_rate);
    cfg.search.mutation_rate = get_num(s, "search.", "mutation_rate", cfg.search.mutation_rate);
    cfg.search.tournament_size =
        get_int(s, "search.", "tournament_size", cfg.search.tournament_size);
    if (s.contains("init_depth")) {
      const json& d = s.at("init_depth");
      if (!d.is_array() || d.size() != 2) throw ConfigError("search.init_depth", "must be [min, max]");
      cfg.search.init_depth_min = d[0].get<int>();
      cfg.search.init_depth_max = d[1].get<int>();
    }
    if (s.contains("mutation_depth")) {
      const json& d = s.at("mutation_depth");
      if (!d.is_array() || d.size() != 2) {
        throw ConfigError("search.mutation_depth", "must be [min, max]");
      }
      cfg.search.mutation_depth_min = d[0].get<int>();
      cfg.search.mutation_depth_max = d[1].get<int>();
    }
    cfg.search.max_nodes = get_int(s, "search.", "max_nodes", cfg.search.max_nodes);
  }
  cfg.seed = get_u64(j, "", "seed", cfg.seed);
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  // A manifest.json written by a run wraps the resolved config; accept it
  // directly so any run can be replayed from its manifest alone.
  if (j.contains("tool") && j.contains("config")) return config_from_json(j.at("config"));
  return config_from_json(j);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["sut"] = {{"plant", cfg.sut.plant},   {"n_dim", cfg.sut.n_dim},
              {"dt", cfg.sut.dt},         {"warm_up", cfg.sut.warm_up},
              {"params", params_to_json(cfg.sut.params)}};
  if (!cfg.sut.dump_dir.empty()) j["sut"]["dump_dir"] = cfg.sut.dump_dir;
  j["test_duration"] = cfg.test_duration;
  j["b_amp"] = to_std(cfg.b_amp);
  j["amplitude_range"] = {{"lo", to_std(cfg.amplitude_range.lo)},
                          {"hi", to_std(cfg.amplitude_range.hi)}};
  j["fitness"] = {{"b", cfg.fitness.b},
                  {"c", cfg.fitness.c},
                  {"error_threshold", cfg.fitness.error_threshold}};
  j["similarity_threshold"] = cfg.similarity_threshold;
  j["search"] = {{"population", cfg.search.population},
                 {"offspring", cfg.search.offspring},
                 {"generations", cfg.search.generations},
                 {"crossover_rate", cfg.search.crossover_rate},
                 {"mutation_rate", cfg.search.mutation_rate},
                 {"tournament_size", cfg.search.tournament_size},
                 {"init_depth", {cfg.search.init_depth_min, cfg.search.init_depth_max}},
                 {"mutation_depth", {cfg.search.mutation_depth_min, cfg.search.mutation_depth_max}},
                 {"max_nodes", cfg.search.max_nodes}};
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  return j;
}

ProgramSpace make_space(const RunConfig& cfg) {
  ProgramSpace space;
  space.n_dim = cfg.sut.n_dim;
  space.dt = cfg.sut.dt;
  space.k_max = static_cast<Eigen::Index>(std::llround(cfg.test_duration / cfg.sut.dt));
  space.b_amp = cfg.b_amp;
  space.pattern_time_limit = cfg.test_duration - cfg.sut.warm_up;
  space.max_shift_samples = static_cast<int>(space.k_max / 4);
  space.min_depth = cfg.search.init_depth_min;
  space.max_depth = cfg.search.init_depth_max;
  space.mutation_min_depth = cfg.search.mutation_depth_min;
  space.mutation_max_depth = cfg.search.mutation_depth_max;
  space.max_nodes = cfg.search.max_nodes;
  return space;
}

std::unique_ptr<SutModel> make_sut(const RunConfig& cfg) {
  const SutSpec spec{cfg.sut.dt, cfg.sut.warm_up, cfg.amplitude_range};
  return std::visit(
      [&](const auto& p) -> std::unique_ptr<SutModel> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Lti2Params>) {
          return make_lti2(p, spec, cfg.sut.n_dim);
        } else if constexpr (std::is_same_v<T, Sat2Params>) {
          return make_sat2(p, spec, cfg.sut.n_dim);
        } else if constexpr (std::is_same_v<T, Quad1dParams>) {
          return make_quad1d(p, spec);
        } else {
          return make_engine1(p, spec);
        }
      },
      cfg.sut.params);
}

SearchConfig make_search_config(const RunConfig& cfg) {
  SearchConfig scfg;
  scfg.population = cfg.search.population;
  scfg.offspring = cfg.search.offspring;
  scfg.generations = cfg.search.generations;
  scfg.crossover_rate = cfg.search.crossover_rate;
  scfg.mutation_rate = cfg.search.mutation_rate;
  scfg.tournament_size = cfg.search.tournament_size;
  scfg.similarity_threshold = cfg.similarity_threshold;
  scfg.seed = cfg.seed;
  return scfg;
}

RunConfig apply_budget_scale(RunConfig cfg, double factor) {
  if (!(factor > 0.0)) throw ConfigError("budget-scale", "must be positive");
  if (factor == 1.0) return cfg;
  cfg.search.generations =
      std::max(1, static_cast<int>(std::llround(cfg.search.generations * factor)));
  cfg.search.offspring = std::max(2, static_cast<int>(std::llround(cfg.search.offspring * factor)));
  cfg.search.population = std::min(cfg.search.population, cfg.search.offspring);
  return cfg;
}

}  // namespace mrf
