#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "szlab/kernel.hpp"
#include "szlab/measures.hpp"

namespace szlab {

// ------------------------------------------------------------ Kodaira map

/// Phi~_N(x) = (S_1(x), ..., S_d(x)) and the projective point it defines.
struct KodairaPoint {
  Eigen::VectorXcd lift;        // Phi~_N(x)
  Eigen::VectorXcd projective;  // lift / |lift|
  double norm2 = 0.0;           // |Phi~_N(x)|^2 = Pi_N(x, x)
};
KodairaPoint kodaira_map(const KernelEvaluator& K, const BundlePoint& x);

// ------------------------------------------------------------ Tian isometry

/// (1/N) Phi_N^* omega_FS at chart point z as a Hermitian m x m coefficient
/// matrix, from the holomorphic horizontal jets D_q and values V:
///   (1/N) [<D_q, D_r> / Pi - <D_q, V><V, D_r> / Pi^2].
Eigen::MatrixXcd tian_pullback_metric(const KernelEvaluator& K, std::span<const cd> z);

/// Coordinate-free relative deviation of the pulled-back metric from the
/// Kähler metric g at z: spectral radius of g^{-1/2} (G_N - g) g^{-1/2}.
double tian_relative_error(const KernelEvaluator& K, std::span<const cd> z);

struct TianReport {
  int m = 1;
  std::string weight;
  std::vector<int> N;
  std::vector<double> sup_error;  // over the test points
  std::vector<double> ratio;      // sup_error[i] / sup_error[i-1] (NaN for the first)
  std::size_t n_points = 0;

  std::string to_csv() const;  // N,statistic,value,stderr
  nlohmann::json to_json() const;
};

/// Sup over `points` (chart coordinates of a chart centered at `base`) of the
/// relative deviation, for each N (strictly increasing).
TianReport tian_study(int m, const std::string& weight, std::span<const cd> base,
                      const std::vector<std::vector<cd>>& points, const std::vector<int>& Ns,
                      const Parallelism& par);

// ------------------------------------------------------------ Kodaira probe

/// f_N(t) = |Pi_N(0, tv/sqrt N)|^2 / (Pi_N(0, 0) Pi_N(tv/sqrt N, tv/sqrt N))
/// sampled at the given t, with e^{-|v|^2 t^2} for comparison.
struct KodairaProfile {
  int N = 0;
  std::vector<cd> v;
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> gaussian;
  double max_dev = 0.0;  // max_t |f - gaussian|

  std::string to_csv() const;  // t,f,gaussian
  nlohmann::json to_json() const;
};
KodairaProfile kodaira_separation_probe(const KernelEvaluator& K, std::span<const cd> v,
                                        const std::vector<double>& ts);

// --------------------------------------------------------- sup-norm growth

/// Quantile levels reported by supnorm_statistics.
inline const std::vector<double> kQuantileLevels{0.1, 0.25, 0.5, 0.75, 0.9};

/// Geodesic-spaced grid on CP^1 with Fubini-Study spacing h, as unit
/// homogeneous vectors (2 x P).
Eigen::MatrixXcd fs_sphere_grid(double h);

/// Pointwise Fubini-Study norms of s = sum c_alpha e_alpha at a unit
/// homogeneous point Z (P = sum c_alpha sqrt(K_alpha) Z^alpha):
///   |s| = |P|,  |nabla s|^2 = |grad P|^2 - N^2 |P|^2,
///   |nabla^2 s|^2 = tr(H^* conj(Q) H Q) + m N^2 |P|^2,  Q = I - Z Z^*.
struct PointNorms {
  double value = 0.0, grad = 0.0, hess = 0.0;
};
PointNorms fs_point_norms(const SectionBasis& basis, const Eigen::VectorXcd& c, std::span<const cd> Z);

/// Grid maxima of |s|, |nabla s|, |nabla^2 s| for every column of `coeffs`
/// (monomial coordinates). Returns 3 x S; row 2 is zero when max_order < 2.
Eigen::MatrixXd fs_grid_sup(const SectionBasis& basis, const Eigen::MatrixXcd& grid, const Eigen::MatrixXcd& coeffs,
                            int max_order, const Parallelism& par);
/// One point at a time through fs_point_norms; reference for fs_grid_sup.
Eigen::MatrixXd fs_grid_sup_reference(const SectionBasis& basis, const Eigen::MatrixXcd& grid,
                                      const Eigen::MatrixXcd& coeffs, int max_order);

struct NormGrowthReport {
  std::vector<int> N;
  std::size_t samples = 0;
  int max_order = 1;
  double grid_constant = 0.0;
  std::vector<std::size_t> grid_points;
  std::vector<double> refinement_change;  // max relative change of the sups when h is halved
  std::vector<bool> refinement_ok;        // refinement_change < 2%
  std::vector<std::string> warnings;
  // [order][N index][quantile index]
  std::vector<std::vector<std::vector<double>>> quantiles;
  // Normalized medians and their order-statistic standard errors, [order][N index].
  std::vector<std::vector<double>> median_ratio;
  std::vector<std::vector<double>> median_ratio_se;
  std::vector<double> min_sup_squared;  // smallest |s|_inf^2 over samples, per N
  /// max/min of median_ratio across N for the given order.
  double spread(int order) const;

  std::string to_csv() const;  // N,statistic,value,stderr
  nlohmann::json to_json() const;
};

/// Fubini-Study CP^1 only. Draws `samples` unit-sphere sections per N, grid
/// spacing grid_constant / sqrt(N), validates one refinement per N on the
/// first min(5, samples) draws.
NormGrowthReport supnorm_statistics(const std::vector<int>& Ns, Ensemble ensemble, std::size_t samples,
                                    std::uint64_t seed, int max_order, const Parallelism& par,
                                    double grid_constant = 0.15);

struct TailCalibration {
  double lambda = 0.0;
  double frequency = 0.0;
  double expected = 0.0;
  double sigma = 0.0;
  bool pass = false;
};
/// Fraction of unit-sphere sections with |s(x0)| > lambda sqrt(Pi_N(x0, x0))
/// against (1 - lambda^2)^{d-1}.
TailCalibration tail_calibration(const KernelEvaluator& K, std::span<const cd> z0, double lambda,
                                 std::size_t samples, std::uint64_t seed, const Parallelism& par);

struct FrameNormBounds {
  std::vector<int> N;
  std::vector<double> sup_value2;    // sup |Phi~|^2
  std::vector<double> sup_hol2;      // sup |d^h Phi~|^2
  std::vector<double> sup_antihol2;  // sup |dbar^h Phi~|^2
  std::vector<double> hol_ratio;     // sup_hol2 / N^{m+1}
  nlohmann::json to_json() const;
};
/// Sups of the coherent-state norms over chart points |z| <= radius on a
/// lattice of step radius/4 in each real coordinate.
FrameNormBounds frame_norm_bounds(int m, const std::string& weight, std::span<const cd> base,
                                  const std::vector<int>& Ns, double radius, const Parallelism& par);

}  // namespace szlab
