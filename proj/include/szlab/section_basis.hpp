#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "szlab/chart.hpp"
#include "szlab/model.hpp"
#include "szlab/parallel.hpp"
#include "szlab/quadrature.hpp"

namespace szlab {

/// Homogeneous exponents (alpha_0, ..., alpha_m), alpha_0 = N - |alpha|, in
/// lexicographic order of (alpha_1, ..., alpha_m). For m = 1 entry j is z^j.
std::vector<std::array<int, 3>> monomial_exponents(int m, int N);

/// Values, gradients and (optionally) Hessians of the Fubini-Study-normalized
/// monomials e_alpha(Z) = sqrt(K_alpha) Z^alpha at one homogeneous point,
/// K_alpha = (N+m)! / (pi^m prod_k alpha_k!). With |Z| = 1, |e_alpha(Z)| is the
/// pointwise h_FS^N-norm of the section, and the e_alpha are orthonormal for
/// the Fubini-Study inner product.
struct MonomialJet {
  Eigen::VectorXcd value;               // d
  Eigen::MatrixXcd grad;                // d x (m+1): d e_alpha / dZ_k
  std::vector<Eigen::VectorXcd> hess;   // (m+1)^2 entries, index k*(m+1)+l
};

/// Section coefficients relative to an orthonormal basis of H^0(CP^m, O(N)).
///
/// Basis element S_j = sum_alpha C(alpha, j) e_alpha. For the Fubini-Study
/// model C = I; otherwise C = L^{-T} with G = L L^* the quadrature Gram matrix
/// of the e_alpha under the weighted inner product int h^N(s1, s2) omega^m/m!.
class SectionBasis {
 public:
  const ProjectiveModel& model() const { return model_; }
  int m() const { return model_.m(); }
  int N() const { return model_.N(); }
  std::size_t dimension() const { return exps_.size(); }
  const std::vector<std::array<int, 3>>& exponents() const { return exps_; }
  bool identity_coefficients() const { return identity_; }
  /// C (only meaningful when !identity_coefficients()).
  const Eigen::MatrixXcd& coefficients() const { return C_; }

  /// Fubini-Study L^2 norm squared of the affine monomial w^alpha:
  /// pi^m alpha! (N - |alpha|)! / (N + m)!.
  double monomial_norm2(std::size_t j) const;

  /// e_alpha at a homogeneous point (normalized internally).
  Eigen::VectorXcd monomial_values(std::span<const cd> Z) const;
  /// e_alpha and derivatives at a unit homogeneous point.
  MonomialJet monomial_jet(std::span<const cd> Z, int order) const;

  /// Maps monomial-coordinate vectors to basis coordinates: C^T v.
  Eigen::VectorXcd to_basis(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd to_basis(const Eigen::MatrixXcd& v) const;

  /// S_j(x) for the lift in the chart (z, theta).
  Eigen::VectorXcd values(const HeisenbergChart& chart, std::span<const cd> z, double theta) const;

  /// Lifted basis values and horizontal derivatives at (z, theta).
  struct Jets {
    Eigen::VectorXcd value;    // d
    Eigen::MatrixXcd hol;      // d x m: d^h / dz_q
    Eigen::MatrixXcd antihol;  // d x m: d^h / dzbar_q
  };
  Jets jets(const HeisenbergChart& chart, std::span<const cd> z, double theta) const;

  /// Gram matrix <S_j, S_k> under the model inner product on `grid`
  /// (weights already carry the model volume form).
  Eigen::MatrixXcd gram(const QuadratureGrid& grid, const Parallelism& par) const;

  nlohmann::json to_json() const;

 private:
  friend SectionBasis build_basis(const ProjectiveModel&, const Parallelism&, int);
  explicit SectionBasis(const ProjectiveModel& model) : model_(model) {}

  ProjectiveModel model_;
  std::vector<std::array<int, 3>> exps_;
  std::vector<double> log_sqrt_K_;
  bool identity_ = true;
  Eigen::MatrixXcd C_;
};

/// Orthonormal basis. `bound` = 0 selects 2N + 4. Throws NumericalError if
/// the Gram matrix is not positive definite.
SectionBasis build_basis(const ProjectiveModel& model, const Parallelism& par = Parallelism::serial(),
                         int bound = 0);

/// Gram matrix G(alpha, beta) = sum_i w_i exp(-N phi_i) e_alpha conj(e_beta) of
/// the normalized monomials on `grid`. Blocked GEMM, parallel over node
/// chunks' evaluation and column blocks of the product.
Eigen::MatrixXcd monomial_gram(const ProjectiveModel& model, const QuadratureGrid& grid,
                               const Parallelism& par);
/// Straight triple-loop reference for monomial_gram.
Eigen::MatrixXcd monomial_gram_reference(const ProjectiveModel& model, const QuadratureGrid& grid);

/// Value of the section sum_j c_j S_j lifted at (z, theta).
cd evaluate_section(const SectionBasis& basis, const Eigen::VectorXcd& c, const HeisenbergChart& chart,
                    std::span<const cd> z, double theta);

/// (s^, d^h s^/dz_q, d^h s^/dzbar_q) of one section at one point.
struct SectionJet {
  cd value;
  Eigen::VectorXcd hol;
  Eigen::VectorXcd antihol;
};
SectionJet horizontal_jet(const SectionBasis& basis, const Eigen::VectorXcd& c,
                          const HeisenbergChart& chart, std::span<const cd> z, double theta);

}  // namespace szlab
