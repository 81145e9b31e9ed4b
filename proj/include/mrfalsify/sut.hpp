#pragma once

#include "mrfalsify/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

namespace mrf {

/// Deterministic closed-loop simulator. execute() receives the full absolute
/// input trace (warm-up prefix included) and returns the absolute output of
/// equal shape; the simulation always starts from the operating-point
/// equilibrium for the configured bias.
class SutModel {
 public:
  SutModel(Eigen::Index n_dim, double dt, AmplitudeRange range, double warm_up);
  virtual ~SutModel() = default;

  Eigen::Index n_dim() const { return n_dim_; }
  double dt() const { return dt_; }
  const AmplitudeRange& range() const { return range_; }
  double warm_up() const { return warm_up_; }
  Eigen::Index warm_up_samples() const;

  Trace execute(const Trace& absolute_input);
  long long executions() const { return executions_; }
  void reset_executions() { executions_ = 0; }

  /// When set, every execution dumps its absolute input/output traces as
  /// exec_NNNNNN_{input,output}.csv under the given directory.
  void set_dump_dir(std::filesystem::path dir) { dump_dir_ = std::move(dir); }

 protected:
  virtual Trace do_execute(const Trace& absolute_input) = 0;

 private:
  Eigen::Index n_dim_;
  double dt_;
  AmplitudeRange range_;
  double warm_up_;
  long long executions_ = 0;
  std::filesystem::path dump_dir_;
};

/// Warm-up/bias execution harness: prepends a bias-held warm-up prefix,
/// simulates, drops the prefix from the output and returns the de-biased
/// deviation output. A non-finite output is reported as a failed execution.
std::optional<Trace> run_test(SutModel& m, const Trace& deviation_input);

/// Content-addressed cache over run_test: each distinct deviation input is
/// executed at most once per cache lifetime. Safe for concurrent use; the
/// counter reports actual SUT executions performed through this cache.
class ExecutionCache {
 public:
  std::optional<Trace> cached_execute(SutModel& m, const Trace& deviation_input);
  long long executions() const;
  void clear();

 private:
  struct Entry {
    Eigen::MatrixXd input;
    std::optional<Trace> output;
  };
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> entries_;
  long long executions_ = 0;
};

struct PidGains {
  double kp{0}, ki{0}, kd{0};
};

/// Second-order mass-spring-damper channel per dimension under PID
/// (derivative acts on the measurement). Strictly linear and time-invariant.
struct Lti2Params {
  double mass{1.0};
  double stiffness{4.0};
  double damping{2.0};
  PidGains pid{100.0, 300.0, 16.0};
  double noise_amp{0.0};
  std::uint64_t noise_seed{0};
};

/// lti2 plus actuator magnitude and rate limits.
struct Sat2Params {
  Lti2Params base;
  double force_limit{30.0};
  double rate_limit{4000.0};  // force units per second
};

/// 1-D altitude double integrator with thrust saturation and gravity under
/// a cascaded P (position) / PI (vertical speed) controller.
struct Quad1dParams {
  double mass{0.03};
  double gravity{9.81};
  double thrust_limit{0.42};
  double outer_kp{2.0};
  PidGains inner{0.25, 0.4, 0.0};
  double noise_amp{0.0};
  std::uint64_t noise_seed{0};
};

/// First-order lag with actuation transport delay and throttle saturation
/// under PI control.
struct Engine1Params {
  double gain{6000.0};        // rpm per unit throttle
  double time_constant{2.0};  // seconds
  double delay{0.2};          // seconds
  double throttle_limit{1.0};
  PidGains pid{2.5e-4, 2.5e-4, 0.0};
  double noise_amp{0.0};
  std::uint64_t noise_seed{0};
};

struct SutSpec {
  double dt{0.02};
  double warm_up{3.0};
  AmplitudeRange range;
};

std::unique_ptr<SutModel> make_lti2(const Lti2Params& p, const SutSpec& spec, Eigen::Index n_dim);
std::unique_ptr<SutModel> make_sat2(const Sat2Params& p, const SutSpec& spec, Eigen::Index n_dim);
std::unique_ptr<SutModel> make_quad1d(const Quad1dParams& p, const SutSpec& spec);
std::unique_ptr<SutModel> make_engine1(const Engine1Params& p, const SutSpec& spec);

}  // namespace mrf
