#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cvpm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// x_{k+1} = A x_k + B u_k,  y_k = C x_k.
class LinearSystem {
 public:
  LinearSystem(Matrix A, Matrix B, Matrix C);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }

  Eigen::Index state_dim() const { return A_.rows(); }
  Eigen::Index input_dim() const { return B_.cols(); }
  Eigen::Index output_dim() const { return C_.rows(); }

  Vector step(const Vector& x, const Vector& u) const;
  Vector output(const Vector& x) const { return C_ * x; }

  bool operator==(const LinearSystem& other) const;

 private:
  Matrix A_;
  Matrix B_;
  Matrix C_;
};

/// Planar double-integrator positions driven by velocity inputs, discretized
/// as A = I, B = (e^dt - 1) I, C = I.
LinearSystem discretize_double_integrator(double dt);

/// Density of the radius of the obstacle step: a Gaussian on [0, w_max]
/// renormalized to unit mass; the step direction is uniform.
struct TruncatedRadialGaussian {
  double sigma = 1.0;
  double w_max = 0.0;

  TruncatedRadialGaussian() = default;
  TruncatedRadialGaussian(double sigma, double w_max);

  /// Mass of the untruncated half-Gaussian on [0, w_max]: Phi(w/sigma) - Phi(0).
  double normalizer() const;
  /// Integral of the density over [0, r], clamped to [0, 1].
  double cdf(double r) const;
  /// Inverse of cdf() for p in [0, 1], accurate to 1e-12 in r.
  double quantile(double p) const;

  bool operator==(const TruncatedRadialGaussian&) const = default;
};

double radial_density(const TruncatedRadialGaussian& d, double r);

/// Standard normal CDF, Phi(x) = 0.5 (1 + erf(x / sqrt 2)).
double standard_normal_cdf(double x);

/// Piecewise-constant schedule over integer steps. Entry i holds from
/// `from_step` until the next entry starts; the last entry repeats forever.
template <typename T>
struct StepSchedule {
  struct Entry {
    long from_step = 0;
    T value{};
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;

  const T& at(long step) const;
  bool operator==(const StepSchedule&) const = default;
};

/// Obstacle driven as a random walk with known drift:
/// y_{r,k+1} = y_{r,k} + u_{r,k} + w_k,  ||w_k|| <= w_max,k.
struct ObstacleModel {
  Vector y_r0;
  StepSchedule<Vector> u_r_schedule;
  StepSchedule<double> w_max_schedule;
  double sigma = 1.0;

  void validate() const;

  const Vector& drift(long k) const { return u_r_schedule.at(k); }
  double w_max(long k) const { return w_max_schedule.at(k); }
  TruncatedRadialGaussian density(long k) const { return {sigma, w_max(k)}; }

  bool operator==(const ObstacleModel& other) const;
};

template <typename T>
const T& StepSchedule<T>::at(long step) const {
  if (entries.empty()) throw std::out_of_range("StepSchedule::at on empty schedule");
  std::size_t i = 0;
  while (i + 1 < entries.size() && entries[i + 1].from_step <= step) ++i;
  return entries[i].value;
}

/// Nominal (noise-free) obstacle output at step k + 1.
Vector nominal_next_obstacle(const ObstacleModel& o, const Vector& y_r, long k);

}  // namespace cvpm
