#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "szlab/chart.hpp"
#include "szlab/parallel.hpp"
#include "szlab/section_basis.hpp"

namespace szlab {

/// A point (z, theta) of the circle bundle over a chart.
struct BundlePoint {
  std::vector<cd> z;
  double theta = 0.0;
};

/// Jet slot: 0 = value, 1..m = d^h/dz_q, m+1..2m = d^h/dzbar_q.
using JetSlot = int;

/// Szego kernel Pi_N(x, y) = sum_j S_j(x) conj(S_j(y)) and its horizontal
/// derivative kernels, for one basis and one chart.
class KernelEvaluator {
 public:
  KernelEvaluator(const SectionBasis& basis, const HeisenbergChart& chart);

  const SectionBasis& basis() const { return *basis_; }
  const HeisenbergChart& chart() const { return *chart_; }

  /// d x (2m+1) matrix: column s is slot s of every basis element at x.
  Eigen::MatrixXcd jet_matrix(const BundlePoint& x) const;

  cd szego(const BundlePoint& x, const BundlePoint& y) const;

  /// sum_j (slot_x S_j)(x) * conj((slot_y S_j)(y)). No N^{-1/2} factors.
  cd szego_derivative(const BundlePoint& x, const BundlePoint& y, JetSlot slot_x, JetSlot slot_y) const;

 private:
  const SectionBasis* basis_;
  const HeisenbergChart* chart_;
};

/// u . conj(v) - (|u|^2 + |v|^2) / 2.
cd psi2(std::span<const cd> u, std::span<const cd> v);

/// pi^{-m} exp(i (theta - phi) + psi2(u, v)), m = u.size().
cd heisenberg_kernel(std::span<const cd> u, double theta, std::span<const cd> v, double phi);

/// N^{-m} Pi_N(u / sqrt N, theta / N; v / sqrt N, phi / N). Throws DomainError
/// when the dilated points leave the chart.
cd scaled_kernel(const KernelEvaluator& K, std::span<const cd> u, double theta, std::span<const cd> v,
                 double phi);

/// Grid of scaled points |u| <= radius on a square lattice of the given step
/// in each real coordinate, and fiber angles.
struct ScalingGrid {
  double radius = 2.0;
  double step = 0.25;
  std::vector<double> angles{0.0, 0.7853981633974483};

  static ScalingGrid defaults(int m);
  std::vector<std::vector<cd>> points(int m) const;
};

struct ScalingReport {
  int m = 1;
  std::string weight;
  std::vector<int> N;
  std::vector<double> sup_error;
  std::vector<double> slope_running;       // prefix least-squares slopes (NaN for the first)
  std::vector<double> remainder_constant;  // sup_error * sqrt(N)
  double slope = 0.0;                      // least-squares slope of log sup_error vs log N
  ScalingGrid grid;
  std::size_t grid_points = 0;
  /// Per N: errors at (u index, v index) maximized over the angle pairs.
  std::vector<Eigen::MatrixXd> pair_errors;

  std::string to_csv() const;
  nlohmann::json to_json(bool include_grid) const;
};

/// Sup over grid pairs and angle pairs of |N^{-m} Pi_N(scaled) - Pi^H|.
/// Evaluation is blocked: basis values of all grid points, then one GEMM.
double scaling_sup_error(const KernelEvaluator& K, const ScalingGrid& grid, const Parallelism& par,
                         Eigen::MatrixXd* pair_errors = nullptr);
/// Pairwise loop over szego(); reference for scaling_sup_error.
double scaling_sup_error_reference(const KernelEvaluator& K, const ScalingGrid& grid);

/// Builds a basis and chart per N (chart centered at `base`, homogeneous)
/// and measures the sup error. Throws DomainError on an empty or
/// non-increasing N list.
ScalingReport scaling_study(int m, const std::string& weight, std::span<const cd> base,
                            const ScalingGrid& grid, const std::vector<int>& Ns, const Parallelism& par);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct DensityFit {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  double residual = 0.0;  // max relative deviation of the fit from the data
  double condition = 0.0;
  std::vector<int> N;
  std::vector<double> density;
};

/// Pi_N(x, x) at the homogeneous point `Z`, for the model (m, weight, N).
double diagonal_density(const SectionBasis& basis, std::span<const cd> Z);

/// Fits Pi_N(x, x) ~ a0 N^m + a1 N^{m-1} + a2 N^{m-2}. Needs >= 3 distinct N;
/// throws NumericalError when the scaled design matrix has condition > 1e12.
DensityFit density_expansion_fit(int m, const std::string& weight, std::span<const cd> Z,
                                 const std::vector<int>& Ns, const Parallelism& par);
DensityFit density_expansion_fit(const std::vector<int>& Ns, const std::vector<double>& density, int m);

}  // namespace szlab
