#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "szlab/weight_expr.hpp"

namespace szlab {

using cd = std::complex<double>;

/// Largest supported dim H^0(CP^m, O(N)).
inline constexpr std::size_t kMaxSectionDimension = 2000;

/// binomial(N+m, m), counted by enumerating monomials of total degree <= N.
std::size_t section_dimension(int m, int N);

/// CP^m (m = 1, 2) with hermitian metric h = h_FS * exp(-phi) on O(1), and
/// bundle power N. The Kähler form is the curvature form of h,
/// omega = omega_FS + (i/2) ddbar(phi), and volumes use omega^m / m!.
class ProjectiveModel {
 public:
  /// Validates m in {1,2}, N >= 1, d_N <= kMaxSectionDimension and the weight
  /// (bounded on the chart, continuous at the hyperplane at infinity, positive
  /// curvature form). Throws DomainError / ResourceCapError.
  static ProjectiveModel make(int m, int N, std::string_view weight = "0");

  int m() const { return m_; }
  int N() const { return N_; }
  const WeightExpr& weight() const { return weight_; }
  bool unperturbed() const { return weight_.is_zero(); }

  /// pi^m / m!; independent of the weight (cohomological).
  double volume() const;
  std::size_t dimension() const { return section_dimension(m_, N_); }

  /// Largest |phi| seen during validation.
  double weight_amplitude() const { return weight_amplitude_; }

  /// phi at the affine point w of the standard chart (w_j = Z_j / Z_0).
  double phi(std::span<const cd> w) const { return weight_.value(w); }

  /// det(omega) / det(omega_FS) at w.
  double volume_density_ratio(std::span<const cd> w) const;

  /// Same model at another bundle power.
  ProjectiveModel with_power(int N) const;

 private:
  ProjectiveModel(int m, int N, WeightExpr w, double amp)
      : m_(m), N_(N), weight_(std::move(w)), weight_amplitude_(amp) {}

  int m_;
  int N_;
  WeightExpr weight_;
  double weight_amplitude_ = 0.0;
};

/// Fubini-Study metric coefficients d^2 log(1+|w|^2) / dw_j dwbar_k.
Eigen::MatrixXcd fubini_study_metric(std::span<const cd> w);

}  // namespace szlab
