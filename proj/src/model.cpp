#include "cvpm/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cvpm/errors.hpp"

namespace cvpm {

namespace {

bool same_shape_and_values(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

LinearSystem::LinearSystem(Matrix A, Matrix B, Matrix C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  const auto n = A_.rows();
  if (n == 0 || A_.cols() != n) throw InvalidArgument("LinearSystem: A must be square and non-empty");
  if (B_.rows() != n || B_.cols() == 0)
    throw InvalidArgument("LinearSystem: B must have " + std::to_string(n) + " rows and at least one column");
  if (C_.cols() != n || C_.rows() == 0)
    throw InvalidArgument("LinearSystem: C must have " + std::to_string(n) + " columns and at least one row");
}

Vector LinearSystem::step(const Vector& x, const Vector& u) const { return A_ * x + B_ * u; }

bool LinearSystem::operator==(const LinearSystem& other) const {
  return same_shape_and_values(A_, other.A_) && same_shape_and_values(B_, other.B_) &&
         same_shape_and_values(C_, other.C_);
}

LinearSystem discretize_double_integrator(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("discretize_double_integrator: dt must be positive");
  const Matrix I = Matrix::Identity(2, 2);
  return LinearSystem(I, std::expm1(dt) * I, I);
}

double standard_normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

TruncatedRadialGaussian::TruncatedRadialGaussian(double sigma_, double w_max_) : sigma(sigma_), w_max(w_max_) {
  if (!(sigma > 0.0)) throw InvalidArgument("TruncatedRadialGaussian: sigma must be positive");
  if (!(w_max >= 0.0)) throw InvalidArgument("TruncatedRadialGaussian: w_max must be nonnegative");
}

double TruncatedRadialGaussian::normalizer() const {
  // Phi(w/sigma) - Phi(0) written through erf to avoid cancellation for small w.
  return 0.5 * std::erf(w_max / (sigma * std::numbers::sqrt2));
}

double TruncatedRadialGaussian::cdf(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= w_max) return 1.0;
  const double s = sigma * std::numbers::sqrt2;
  return std::erf(r / s) / std::erf(w_max / s);
}

double TruncatedRadialGaussian::quantile(double p) const {
  if (p <= 0.0 || w_max == 0.0) return 0.0;
  if (p >= 1.0) return w_max;
  // Safeguarded Newton on cdf(r) - p; cdf is smooth and strictly increasing.
  double lo = 0.0;
  double hi = w_max;
  double r = p * w_max;
  for (int it = 0; it < 100; ++it) {
    const double g = cdf(r) - p;
    if (g > 0.0) hi = r; else lo = r;
    if (hi - lo <= 1e-12) break;
    const double slope = radial_density(*this, r);
    double next = slope > 0.0 ? r - g / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-13) {
      r = next;
      break;
    }
    r = next;
  }
  return r;
}

double radial_density(const TruncatedRadialGaussian& d, double r) {
  if (r < 0.0 || r > d.w_max || d.w_max == 0.0) return 0.0;
  const double z = d.normalizer();
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  return std::exp(-r * r / (2.0 * d.sigma * d.sigma)) / (d.sigma * z * sqrt_2pi);
}

void ObstacleModel::validate() const {
  if (y_r0.size() == 0) throw InvalidArgument("ObstacleModel: y_r0 is empty");
  if (u_r_schedule.entries.empty()) throw InvalidArgument("ObstacleModel: u_r schedule is empty");
  if (w_max_schedule.entries.empty()) throw InvalidArgument("ObstacleModel: w_max schedule is empty");
  if (!(sigma > 0.0)) throw InvalidArgument("ObstacleModel: sigma must be positive");
  for (std::size_t i = 0; i < u_r_schedule.entries.size(); ++i) {
    const auto& e = u_r_schedule.entries[i];
    if (e.value.size() != y_r0.size()) throw InvalidArgument("ObstacleModel: u_r dimension differs from y_r0");
    if (i > 0 && e.from_step <= u_r_schedule.entries[i - 1].from_step)
      throw InvalidArgument("ObstacleModel: u_r schedule steps must increase");
  }
  for (std::size_t i = 0; i < w_max_schedule.entries.size(); ++i) {
    const auto& e = w_max_schedule.entries[i];
    if (!(e.value >= 0.0)) throw InvalidArgument("ObstacleModel: w_max entries must be nonnegative");
    if (i > 0 && e.from_step <= w_max_schedule.entries[i - 1].from_step)
      throw InvalidArgument("ObstacleModel: w_max schedule steps must increase");
  }
}

bool ObstacleModel::operator==(const ObstacleModel& other) const {
  if (!same_shape_and_values(y_r0, other.y_r0) || sigma != other.sigma) return false;
  if (!(w_max_schedule == other.w_max_schedule)) return false;
  const auto& a = u_r_schedule.entries;
  const auto& b = other.u_r_schedule.entries;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].from_step != b[i].from_step || !same_shape_and_values(a[i].value, b[i].value)) return false;
  }
  return true;
}

Vector nominal_next_obstacle(const ObstacleModel& o, const Vector& y_r, long k) {
  const Vector& u_r = o.drift(k);
  if (u_r.size() != y_r.size()) throw InvalidArgument("nominal_next_obstacle: dimension mismatch");
  return y_r + u_r;
}

}  // namespace cvpm
