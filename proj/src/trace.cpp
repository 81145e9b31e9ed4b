#include "mrfalsify/trace.hpp"

#include "mrfalsify/util.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mrf {

namespace {

void require_same_shape(const Trace& a, const Trace& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": trace shapes do not match");
  }
}

}  // namespace

double distance(const Trace& a, const Trace& b) {
  require_same_shape(a, b, "distance");
  const double step_norm_sum = (a.samples() - b.samples()).colwise().norm().sum();
  return step_norm_sum / (static_cast<double>(a.n_dim()) * static_cast<double>(a.k_max()));
}

Trace superimpose(const Trace& a, const Trace& b) {
  require_same_shape(a, b, "superimpose");
  return Trace(a.samples() + b.samples(), a.dt());
}

Trace scale(const Trace& a, double s) { return Trace(s * a.samples(), a.dt()); }

Trace shift(const Trace& a, Eigen::Index delta_samples) {
  if (delta_samples < 0 || delta_samples >= a.k_max()) {
    throw std::invalid_argument("shift: delta_samples must lie in [0, k_max)");
  }
  if (delta_samples == 0) return a;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.n_dim(), a.k_max());
  out.rightCols(a.k_max() - delta_samples) = a.samples().leftCols(a.k_max() - delta_samples);
  return Trace(std::move(out), a.dt());
}

void write_csv(const Trace& t, std::ostream& os) {
  os << 't';
  for (Eigen::Index i = 0; i < t.n_dim(); ++i) os << ",dim" << i;
  os << '\n';
  for (Eigen::Index k = 0; k < t.k_max(); ++k) {
    os << format_double(static_cast<double>(k) * t.dt());
    for (Eigen::Index i = 0; i < t.n_dim(); ++i) os << ',' << format_double(t(i, k));
    os << '\n';
  }
}

Trace read_csv(std::istream& is, double fallback_dt) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_csv: empty input");
  Eigen::Index n_dim = 0;
  for (char c : line) {
    if (c == ',') ++n_dim;
  }
  if (n_dim < 1) throw std::invalid_argument("read_csv: header must name at least one dimension");

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0) {
        times.push_back(v);
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != n_dim + 1) throw std::invalid_argument("read_csv: row width does not match header");
  }
  if (times.empty()) throw std::invalid_argument("read_csv: no sample rows");

  const Eigen::Index k_max = static_cast<Eigen::Index>(times.size());
  const double dt = k_max >= 2 ? times[1] - times[0] : fallback_dt;
  Eigen::MatrixXd samples(n_dim, k_max);
  for (Eigen::Index k = 0; k < k_max; ++k) {
    for (Eigen::Index i = 0; i < n_dim; ++i) {
      samples(i, k) = values[static_cast<size_t>(k) * n_dim + i];
    }
  }
  return Trace(std::move(samples), dt);
}

}  // namespace mrf
