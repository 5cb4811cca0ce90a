#pragma once

// Antisymmetric Gaussian matrix chain and the continuous objects h_d, m_d, p_d.

#include "sogt/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sogt {

/// Real d x d matrix with A + A^T = 0, stored as its strict upper triangle.
class AntisymmetricMatrix {
 public:
  explicit AntisymmetricMatrix(int d);

  int dim() const { return d_; }
  /// 0-based entry (i, j); the diagonal is 0.
  double at(int i, int j) const;
  /// Sets A(i, j) = v and A(j, i) = -v, i < j.
  void set(int i, int j, double v);
  AntisymmetricMatrix& operator+=(const AntisymmetricMatrix& other);
  Eigen::MatrixXd dense() const;
  double frobenius_squared() const;

 private:
  std::size_t slot(int i, int j) const;

  int d_;
  std::vector<double> upper_;
};

/// Decreasing, non-negative, floor(d/2) entries.
using SpectrumPoint = std::vector<double>;

/// v w^T - w v^T.
AntisymmetricMatrix outer_difference(const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// One increment of the chain: v, w independent standard Gaussian vectors of R^d.
AntisymmetricMatrix sample_increment(int d, Engine& engine);

/// The floor(d/2) largest eigenvalues of iA, from the singular values of A.
/// Throws NumericError on non-finite entries.
SpectrumPoint top_spectrum(const AntisymmetricMatrix& a);

/// Same quantity through a complex Hermitian eigensolver; independent check of top_spectrum.
SpectrumPoint top_spectrum_hermitian(const AntisymmetricMatrix& a);

/// samples[path][n] = Lambda(n), n = 0..n_steps, Lambda(0) = 0.
std::vector<std::vector<SpectrumPoint>> simulate_eigen_chain(int d, int n_steps, std::size_t n_paths,
                                                             std::uint64_t seed);

/// True when x is decreasing and non-negative with floor(d/2) entries.
bool in_closed_chamber(int d, const SpectrumPoint& x);

double h_d(int d, const SpectrumPoint& lambda);
double m_d(int d, const SpectrumPoint& x, const SpectrumPoint& y);
/// Density of Lambda(n+1) at y given Lambda(n) = x. Throws NumericError when h_d(x) = 0.
double p_d_density(int d, const SpectrumPoint& x, const SpectrumPoint& y);

}  // namespace sogt
