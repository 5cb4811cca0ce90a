#include "sogt/spectra.hpp"

#include "sogt/rational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>

namespace sogt {

AntisymmetricMatrix::AntisymmetricMatrix(int d) : d_(d) {
  if (d < 1) throw ContractViolation("AntisymmetricMatrix: dimension must be positive");
  upper_.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d - 1) / 2, 0.0);
}

std::size_t AntisymmetricMatrix::slot(int i, int j) const {
  // row-major strict upper triangle
  const auto ui = static_cast<std::size_t>(i);
  const auto uj = static_cast<std::size_t>(j);
  const auto n = static_cast<std::size_t>(d_);
  return ui * n - ui * (ui + 1) / 2 + (uj - ui - 1);
}

double AntisymmetricMatrix::at(int i, int j) const {
  if (i == j) return 0.0;
  return i < j ? upper_[slot(i, j)] : -upper_[slot(j, i)];
}

void AntisymmetricMatrix::set(int i, int j, double v) {
  if (i >= j) throw ContractViolation("AntisymmetricMatrix::set: needs i < j");
  upper_[slot(i, j)] = v;
}

AntisymmetricMatrix& AntisymmetricMatrix::operator+=(const AntisymmetricMatrix& other) {
  if (other.d_ != d_) throw ContractViolation("AntisymmetricMatrix: dimension mismatch");
  for (std::size_t s = 0; s < upper_.size(); ++s) upper_[s] += other.upper_[s];
  return *this;
}

Eigen::MatrixXd AntisymmetricMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_, d_);
  for (int i = 0; i < d_; ++i) {
    for (int j = i + 1; j < d_; ++j) {
      m(i, j) = upper_[slot(i, j)];
      m(j, i) = -m(i, j);
    }
  }
  return m;
}

double AntisymmetricMatrix::frobenius_squared() const {
  double total = 0;
  for (double v : upper_) total += 2 * v * v;
  return total;
}

AntisymmetricMatrix outer_difference(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  if (v.size() != w.size()) throw ContractViolation("outer_difference: size mismatch");
  const int d = static_cast<int>(v.size());
  AntisymmetricMatrix a(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) a.set(i, j, v(i) * w(j) - w(i) * v(j));
  }
  return a;
}

AntisymmetricMatrix sample_increment(int d, Engine& engine) {
  if (d < 2) throw ContractViolation("sample_increment: d must be at least 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  Eigen::VectorXd w(d);
  for (int i = 0; i < d; ++i) v(i) = normal(engine);
  for (int i = 0; i < d; ++i) w(i) = normal(engine);
  return outer_difference(v, w);
}

namespace {

void require_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericError("top_spectrum: non-finite matrix entry");
}

// numerical rank cutoff: values below d * eps * largest are zero
void flush_rank_noise(SpectrumPoint& s, int d) {
  if (s.empty()) return;
  const double cutoff = d * std::numeric_limits<double>::epsilon() * s.front();
  for (double& v : s) {
    if (v <= cutoff) v = 0.0;
  }
}

}  // namespace

SpectrumPoint top_spectrum(const AntisymmetricMatrix& a) {
  const Eigen::MatrixXd m = a.dense();
  require_finite(m);
  const int r = a.dim() / 2;
  SpectrumPoint out(static_cast<std::size_t>(r), 0.0);
  if (r == 0) return out;
  // the eigenvalues of iA are ±s_i: singular values of A come in equal pairs, sorted decreasingly
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  for (int i = 0; i < r; ++i) out[static_cast<std::size_t>(i)] = s(2 * i);
  flush_rank_noise(out, a.dim());
  return out;
}

SpectrumPoint top_spectrum_hermitian(const AntisymmetricMatrix& a) {
  const Eigen::MatrixXd m = a.dense();
  require_finite(m);
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * m.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();  // ascending
  const int r = a.dim() / 2;
  SpectrumPoint out;
  for (int i = 0; i < r; ++i) out.push_back(std::max(0.0, ev(a.dim() - 1 - i)));
  flush_rank_noise(out, a.dim());
  return out;
}

std::vector<std::vector<SpectrumPoint>> simulate_eigen_chain(int d, int n_steps, std::size_t n_paths,
                                                             std::uint64_t seed) {
  if (n_steps < 0) throw ContractViolation("simulate_eigen_chain: n_steps must be non-negative");
  std::vector<std::vector<SpectrumPoint>> samples(n_paths);
  for (std::size_t path = 0; path < n_paths; ++path) {
    Engine engine = path_engine(seed ^ 0x243f6a8885a308d3ULL, path);
    AntisymmetricMatrix m(d);
    samples[path].push_back(SpectrumPoint(static_cast<std::size_t>(d / 2), 0.0));
    for (int n = 1; n <= n_steps; ++n) {
      m += sample_increment(d, engine);
      samples[path].push_back(top_spectrum(m));
    }
  }
  return samples;
}

bool in_closed_chamber(int d, const SpectrumPoint& x) {
  if (x.size() != static_cast<std::size_t>(d / 2)) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < 0) return false;
    if (i + 1 < x.size() && x[i] < x[i + 1]) return false;
  }
  return true;
}

double h_d(int d, const SpectrumPoint& lambda) {
  if (d < 3) throw ContractViolation("h_d: d must be at least 3");
  if (!in_closed_chamber(d, lambda)) throw ContractViolation("h_d: point outside the closed chamber");
  const int r = d / 2;
  const bool odd = d % 2 == 1;
  double v = 1.0;
  double c = 1.0;
  for (int i = 1; i <= r; ++i) {
    const double li = lambda[static_cast<std::size_t>(i - 1)];
    for (int j = i + 1; j <= r; ++j) {
      const double lj = lambda[static_cast<std::size_t>(j - 1)];
      v *= (li - lj) * (li + lj);
      c *= static_cast<double>(j - i) * static_cast<double>(d - j - i);
    }
    if (odd) {
      v *= li;
      c *= static_cast<double>(r) + 0.5 - static_cast<double>(i);
    }
  }
  return v / c;
}

double m_d(int d, const SpectrumPoint& x, const SpectrumPoint& y) {
  if (d < 3) throw ContractViolation("m_d: d must be at least 3");
  if (!in_closed_chamber(d, x) || !in_closed_chamber(d, y)) throw ContractViolation("m_d: point outside the closed chamber");
  const int r = d / 2;
  const bool odd = d % 2 == 1;
  const int free = odd ? r : r - 1;
  double value = 1.0;
  for (int i = 0; i < free; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double upper = std::min(x[ui], y[ui]);
    const double lower = (i + 1 < r) ? std::max(x[ui + 1], y[ui + 1]) : 0.0;
    if (upper < lower) return 0.0;
    const double shift = x[ui] + y[ui];
    value *= (std::exp(2 * upper - shift) - std::exp(2 * lower - shift)) / 2;
  }
  if (!odd) {
    const double xr = x[static_cast<std::size_t>(r - 1)];
    const double yr = y[static_cast<std::size_t>(r - 1)];
    value *= std::exp(-std::abs(xr - yr)) + std::exp(-(xr + yr));
  }
  return value;
}

double p_d_density(int d, const SpectrumPoint& x, const SpectrumPoint& y) {
  const double hx = h_d(d, x);
  if (!(hx > 0)) throw NumericError("p_d_density: x lies on the boundary of the chamber");
  if (!in_closed_chamber(d, y)) return 0.0;
  return h_d(d, y) / hx * m_d(d, x, y);
}

}  // namespace sogt
