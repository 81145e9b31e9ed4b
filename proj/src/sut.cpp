#include "mrfalsify/sut.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <stdexcept>

namespace mrf {

namespace {

std::uint64_t hash_trace(const Trace& t) {
  // FNV-1a over the raw sample bytes plus the shape.
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const Eigen::Index rows = t.n_dim();
  const Eigen::Index cols = t.k_max();
  mix(&rows, sizeof(rows));
  mix(&cols, sizeof(cols));
  mix(t.samples().data(), sizeof(double) * static_cast<size_t>(rows * cols));
  return h;
}

class Noise {
 public:
  Noise(double amp, std::uint64_t seed) : amp_(amp), rng_(seed) {}
  double operator()() {
    if (amp_ == 0.0) return 0.0;
    return std::uniform_real_distribution<double>(-amp_, amp_)(rng_);
  }

 private:
  double amp_;
  std::mt19937_64 rng_;
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

SutModel::SutModel(Eigen::Index n_dim, double dt, AmplitudeRange range, double warm_up)
    : n_dim_(n_dim), dt_(dt), range_(std::move(range)), warm_up_(warm_up) {
  require_positive(dt_, "sut dt");
  if (warm_up_ < 0.0) throw std::invalid_argument("sut warm_up must be non-negative");
  range_.validate();
  if (range_.lo.size() != n_dim_) {
    throw std::invalid_argument("sut amplitude range dimension mismatch");
  }
}

Eigen::Index SutModel::warm_up_samples() const {
  return static_cast<Eigen::Index>(std::llround(warm_up_ / dt_));
}

Trace SutModel::execute(const Trace& absolute_input) {
  if (absolute_input.n_dim() != n_dim_ || absolute_input.dt() != dt_) {
    throw std::invalid_argument("execute: input shape does not match the model");
  }
  Trace out = do_execute(absolute_input);
  ++executions_;
  if (!dump_dir_.empty()) {
    char name[64];
    std::snprintf(name, sizeof(name), "exec_%06lld", executions_ - 1);
    std::ofstream fi(dump_dir_ / (std::string(name) + "_input.csv"));
    write_csv(absolute_input, fi);
    std::ofstream fo(dump_dir_ / (std::string(name) + "_output.csv"));
    write_csv(out, fo);
  }
  return out;
}

std::optional<Trace> run_test(SutModel& m, const Trace& deviation_input) {
  const Eigen::Index k_warm = m.warm_up_samples();
  const Eigen::Index k_max = deviation_input.k_max();
  const Eigen::VectorXd bias = m.range().bias();

  Eigen::MatrixXd absolute(m.n_dim(), k_warm + k_max);
  absolute.leftCols(k_warm).colwise() = bias;
  absolute.rightCols(k_max) = deviation_input.samples().colwise() + bias;

  const Trace output = m.execute(Trace(std::move(absolute), m.dt()));
  Eigen::MatrixXd deviation = output.samples().rightCols(k_max).colwise() - bias;
  if (!deviation.allFinite()) return std::nullopt;
  return Trace(std::move(deviation), m.dt());
}

std::optional<Trace> ExecutionCache::cached_execute(SutModel& m, const Trace& deviation_input) {
  const std::uint64_t key = hash_trace(deviation_input);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      for (const Entry& e : it->second) {
        if (e.input.rows() == deviation_input.samples().rows() &&
            e.input.cols() == deviation_input.samples().cols() &&
            e.input == deviation_input.samples()) {
          return e.output;
        }
      }
    }
  }
  std::optional<Trace> out = run_test(m, deviation_input);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++executions_;
    entries_[key].push_back(Entry{deviation_input.samples(), out});
  }
  return out;
}

long long ExecutionCache::executions() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return executions_;
}

void ExecutionCache::clear() {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.clear();
  executions_ = 0;
}

namespace {

class Lti2Model : public SutModel {
 public:
  Lti2Model(const Lti2Params& p, const SutSpec& spec, Eigen::Index n_dim, bool saturated,
            double force_limit, double rate_limit)
      : SutModel(n_dim, spec.dt, spec.range, spec.warm_up),
        p_(p),
        saturated_(saturated),
        force_limit_(force_limit),
        rate_limit_(rate_limit) {
    require_positive(p_.mass, "lti2 mass");
    require_positive(p_.stiffness, "lti2 stiffness");
    require_positive(p_.pid.ki, "lti2 pid.ki");
    if (p_.damping < 0.0) throw std::invalid_argument("lti2 damping must be non-negative");
    if (saturated_) {
      require_positive(force_limit_, "sat2 force_limit");
      require_positive(rate_limit_, "sat2 rate_limit");
    }
  }

 protected:
  Trace do_execute(const Trace& in) override {
    const double dt_s = dt();
    const Eigen::VectorXd bias = range().bias();
    Eigen::MatrixXd out(in.n_dim(), in.k_max());
    for (Eigen::Index i = 0; i < in.n_dim(); ++i) {
      Noise noise(p_.noise_amp, p_.noise_seed + static_cast<std::uint64_t>(i));
      // Equilibrium for a constant bias reference: spring force balanced by
      // the integral term, zero velocity, zero error.
      double x = bias(i);
      double v = 0.0;
      double integral = p_.stiffness * bias(i) / p_.pid.ki;
      double x_meas_prev = bias(i);
      double u_prev = p_.stiffness * bias(i);
      for (Eigen::Index k = 0; k < in.k_max(); ++k) {
        const double x_meas = x + noise();
        const double e = in(i, k) - x_meas;
        integral += dt_s * e;
        double u = p_.pid.kp * e + p_.pid.ki * integral -
                   p_.pid.kd * (x_meas - x_meas_prev) / dt_s;
        x_meas_prev = x_meas;
        if (saturated_) {
          u = std::clamp(u, u_prev - rate_limit_ * dt_s, u_prev + rate_limit_ * dt_s);
          u = std::clamp(u, -force_limit_, force_limit_);
          u_prev = u;
        }
        v += dt_s * (u - p_.damping * v - p_.stiffness * x) / p_.mass;
        x += dt_s * v;
        out(i, k) = x;
      }
    }
    return Trace(std::move(out), dt_s);
  }

 private:
  Lti2Params p_;
  bool saturated_;
  double force_limit_;
  double rate_limit_;
};

class Quad1dModel : public SutModel {
 public:
  Quad1dModel(const Quad1dParams& p, const SutSpec& spec)
      : SutModel(1, spec.dt, spec.range, spec.warm_up), p_(p) {
    require_positive(p_.mass, "quad1d mass");
    require_positive(p_.gravity, "quad1d gravity");
    require_positive(p_.inner.ki, "quad1d inner.ki");
    if (!(p_.thrust_limit > p_.mass * p_.gravity)) {
      throw std::invalid_argument("quad1d thrust_limit must exceed the hover thrust");
    }
  }

 protected:
  Trace do_execute(const Trace& in) override {
    const double dt_s = dt();
    const double hover = p_.mass * p_.gravity;
    Noise noise(p_.noise_amp, p_.noise_seed);
    double z = range().bias()(0);
    double vz = 0.0;
    double integral = 0.0;
    double ev_prev = 0.0;
    Eigen::MatrixXd out(1, in.k_max());
    for (Eigen::Index k = 0; k < in.k_max(); ++k) {
      const double z_meas = z + noise();
      const double vz_des = p_.outer_kp * (in(0, k) - z_meas);
      const double ev = vz_des - vz;
      integral += dt_s * ev;
      const double cmd = hover + p_.inner.kp * ev + p_.inner.ki * integral +
                         p_.inner.kd * (ev - ev_prev) / dt_s;
      ev_prev = ev;
      const double thrust = std::clamp(cmd, 0.0, p_.thrust_limit);
      vz += dt_s * (thrust / p_.mass - p_.gravity);
      z += dt_s * vz;
      out(0, k) = z;
    }
    return Trace(std::move(out), dt_s);
  }

 private:
  Quad1dParams p_;
};

class Engine1Model : public SutModel {
 public:
  Engine1Model(const Engine1Params& p, const SutSpec& spec)
      : SutModel(1, spec.dt, spec.range, spec.warm_up), p_(p) {
    require_positive(p_.gain, "engine1 gain");
    require_positive(p_.time_constant, "engine1 time_constant");
    require_positive(p_.pid.ki, "engine1 pid.ki");
    if (p_.delay < 0.0) throw std::invalid_argument("engine1 delay must be non-negative");
    const double bias_throttle = range().bias()(0) / p_.gain;
    if (bias_throttle < 0.0 || bias_throttle > p_.throttle_limit) {
      throw std::invalid_argument("engine1 throttle_limit cannot hold the bias rpm");
    }
  }

 protected:
  Trace do_execute(const Trace& in) override {
    const double dt_s = dt();
    const double bias = range().bias()(0);
    const double u_star = bias / p_.gain;
    Noise noise(p_.noise_amp, p_.noise_seed);
    double y = bias;
    double integral = u_star / p_.pid.ki;
    const auto delay_steps = static_cast<size_t>(std::llround(p_.delay / dt_s));
    std::deque<double> pipeline(delay_steps, u_star);
    Eigen::MatrixXd out(1, in.k_max());
    for (Eigen::Index k = 0; k < in.k_max(); ++k) {
      const double e = in(0, k) - (y + noise());
      integral += dt_s * e;
      double u = p_.pid.kp * e + p_.pid.ki * integral;
      u = std::clamp(u, 0.0, p_.throttle_limit);
      pipeline.push_back(u);
      const double u_eff = pipeline.front();
      pipeline.pop_front();
      y += dt_s * (p_.gain * u_eff - y) / p_.time_constant;
      out(0, k) = y;
    }
    return Trace(std::move(out), dt_s);
  }

 private:
  Engine1Params p_;
};

}  // namespace

std::unique_ptr<SutModel> make_lti2(const Lti2Params& p, const SutSpec& spec, Eigen::Index n_dim) {
  return std::make_unique<Lti2Model>(p, spec, n_dim, false, 0.0, 0.0);
}

std::unique_ptr<SutModel> make_sat2(const Sat2Params& p, const SutSpec& spec, Eigen::Index n_dim) {
  return std::make_unique<Lti2Model>(p.base, spec, n_dim, true, p.force_limit, p.rate_limit);
}

std::unique_ptr<SutModel> make_quad1d(const Quad1dParams& p, const SutSpec& spec) {
  return std::make_unique<Quad1dModel>(p, spec);
}

std::unique_ptr<SutModel> make_engine1(const Engine1Params& p, const SutSpec& spec) {
  return std::make_unique<Engine1Model>(p, spec);
}

}  // namespace mrf
