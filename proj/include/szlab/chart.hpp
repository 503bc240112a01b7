#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

#include "szlab/jet.hpp"
#include "szlab/model.hpp"

namespace szlab {

/// Everything the section evaluators need at one chart point.
struct ChartPoint {
  Eigen::VectorXcd Z;       // homogeneous coordinates U (1, L z), not normalized
  double norm_Z = 1.0;      // |Z|
  cd omega;                 // exp(-N phi / 2 - i N Im g), the unitary frame factor
  Eigen::VectorXcd dlog_a;  // d log a / dz_q
  Eigen::VectorXcd A;       // connection coefficients A_q
  Eigen::VectorXcd dg;      // dg / dz_q
};

/// Preferred coordinates and preferred frame centered at a point P0.
///
/// Coordinates: Z(z) = U (1, L z) with U unitary, U e_0 = P0, and L
/// normalizing ddbar of the local potential Phi'(z) = log|Z|^2 + phi(w(z)) to
/// the identity at 0. Frame: e_L with ||e_L^*||^2 = a(z) = exp(Phi' - 2 Re g),
/// where g is the holomorphic 2-jet of Phi' at 0, so that a(0) = 1, da(0) = 0,
/// d^2a/dz dz(0) = 0 and d^2a/dz dzbar(0) = I. For the Fubini-Study model
/// L = I, g = 0 and a(z) = 1 + |z|^2.
///
/// The circle-bundle lift of a section with homogeneous polynomial P is
///   s^(z, theta) = P(Z / |Z|) exp(-N phi / 2 - i N Im g) e^{i N theta}.
class HeisenbergChart {
 public:
  /// `base` is a homogeneous vector for P0 (any nonzero scaling). `rotation`
  /// is an optional m x m unitary applied to the tangent directions.
  static HeisenbergChart make(const ProjectiveModel& model, std::span<const cd> base,
                              const Eigen::MatrixXcd& rotation = Eigen::MatrixXcd());
  /// Chart centered at [1 : 0 : ... : 0].
  static HeisenbergChart at_origin(const ProjectiveModel& model);
  /// Chart centered at the affine point w of the standard chart.
  static HeisenbergChart at_affine(const ProjectiveModel& model, std::span<const cd> w);

  const ProjectiveModel& model() const { return model_; }
  int m() const { return model_.m(); }
  const Eigen::MatrixXcd& unitary() const { return U_; }
  const Eigen::MatrixXcd& normalization() const { return L_; }
  /// d Z / dz, an (m+1) x m matrix (constant).
  const Eigen::MatrixXcd& dZ() const { return dZ_; }

  double validity_radius() const { return radius_; }
  void set_validity_radius(double r) { radius_ = r; }

  /// Throws DomainError outside the validity radius or where the weight's
  /// chart is singular.
  ChartPoint at(std::span<const cd> z) const;

  /// Unit homogeneous representative of the chart point z.
  Eigen::VectorXcd to_homogeneous(std::span<const cd> z) const;
  /// Chart coordinates of a homogeneous point (inverse of to_homogeneous up to
  /// scaling). Throws DomainError on the hyperplane at infinity of the chart.
  Eigen::VectorXcd to_chart(std::span<const cd> Z) const;

  double frame_weight(std::span<const cd> z) const;
  Eigen::VectorXcd dlog_frame_weight(std::span<const cd> z) const { return at(z).dlog_a; }
  Eigen::VectorXcd connection(std::span<const cd> z) const { return at(z).A; }
  /// d^2 Phi' / dz_q dzbar_r, the Kähler metric in these coordinates.
  Eigen::MatrixXcd kahler_metric(std::span<const cd> z) const;
  /// a(z) as a second-order jet in (x_1, y_1, x_2, y_2).
  Jet2 frame_weight_jet(std::span<const cd> z) const;

  /// The holomorphic 2-jet g (value, gradient, Hessian at 0).
  cd g0() const { return g0_; }
  const Eigen::VectorXcd& g1() const { return g1_; }
  const Eigen::MatrixXcd& g2() const { return g2_; }

 private:
  explicit HeisenbergChart(const ProjectiveModel& model) : model_(model) {}
  Jet2 potential_jet(std::span<const cd> z) const;
  void check_domain(std::span<const cd> z) const;

  ProjectiveModel model_;
  Eigen::MatrixXcd U_;
  Eigen::MatrixXcd L_;
  Eigen::MatrixXcd dZ_;
  cd g0_ = 0.0;
  Eigen::VectorXcd g1_;
  Eigen::MatrixXcd g2_;
  double radius_ = 10.0;
};

}  // namespace szlab
