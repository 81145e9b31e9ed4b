#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>

namespace mrf {

/// Uniformly sampled multi-dimensional time series. Rows are signal
/// dimensions, columns are samples; sample k sits at time k*dt.
/// Values are immutable after construction so traces can be shared freely.
class Trace {
 public:
  Trace(Eigen::MatrixXd samples, double dt) : samples_(std::move(samples)), dt_(dt) {
    if (samples_.cols() < 1 || samples_.rows() < 1) {
      throw std::invalid_argument("Trace: needs at least one dimension and one sample");
    }
    if (!(dt_ > 0.0)) {
      throw std::invalid_argument("Trace: dt must be positive");
    }
  }

  static Trace zeros(Eigen::Index n_dim, Eigen::Index k_max, double dt) {
    return Trace(Eigen::MatrixXd::Zero(n_dim, k_max), dt);
  }

  Eigen::Index n_dim() const { return samples_.rows(); }
  Eigen::Index k_max() const { return samples_.cols(); }
  double dt() const { return dt_; }
  const Eigen::MatrixXd& samples() const { return samples_; }
  double operator()(Eigen::Index dim, Eigen::Index k) const { return samples_(dim, k); }

  bool same_shape(const Trace& other) const {
    return n_dim() == other.n_dim() && k_max() == other.k_max() && dt_ == other.dt_;
  }
  bool all_finite() const { return samples_.allFinite(); }

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.dt_ == b.dt_ && a.samples_.rows() == b.samples_.rows() &&
           a.samples_.cols() == b.samples_.cols() && a.samples_ == b.samples_;
  }

 private:
  Eigen::MatrixXd samples_;
  double dt_;
};

/// Per-dimension valid input interval in absolute trace units.
struct AmplitudeRange {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd bias() const { return 0.5 * (lo + hi); }
  Eigen::VectorXd half_width() const { return 0.5 * (hi - lo); }

  void validate() const {
    if (lo.size() != hi.size() || lo.size() == 0) {
      throw std::invalid_argument("AmplitudeRange: lo/hi must be non-empty and equally sized");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (!(lo(i) < hi(i))) {
        throw std::invalid_argument("AmplitudeRange: lo must be strictly below hi in every dimension");
      }
    }
  }
};

/// Average per-step Euclidean distance between two equally shaped traces:
/// the column-wise norms summed over time, divided by n_dim * k_max.
double distance(const Trace& a, const Trace& b);

/// Element-wise sum.
Trace superimpose(const Trace& a, const Trace& b);

/// Element-wise multiplication by s.
Trace scale(const Trace& a, double s);

/// Right time-shift by delta_samples in [0, k_max). The vacated prefix is
/// zero (traces live in deviation-from-bias coordinates, so zero means
/// "hold at the operating point") and the overflowing suffix is dropped.
Trace shift(const Trace& a, Eigen::Index delta_samples);

/// CSV with header "t,dim0,dim1,...", one row per sample, time column k*dt.
void write_csv(const Trace& t, std::ostream& os);

/// Reads the CSV format above. dt is inferred from the time column; for a
/// single-row file the fallback_dt is used.
Trace read_csv(std::istream& is, double fallback_dt = 1.0);

}  // namespace mrf
