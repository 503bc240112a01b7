#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "szlab/kernel.hpp"
#include "szlab/measures.hpp"

namespace szlab {

/// Largest assembled jet-covariance size n (2m + 1).
inline constexpr int kMaxJetComponents = 200;

/// Second moments of the 1-jets (x^p, xi^p_q) of a random section at n points.
/// Index layout of the assembled matrix: values x^1..x^n first, then
/// xi^p_q at n + 2m p + q, where q < m are d^h/dz_q and q >= m are
/// d^h/dzbar_{q-m}.
struct CovarianceBlocks {
  int n = 0;
  int m = 1;
  Eigen::MatrixXcd A;  // n x n
  Eigen::MatrixXcd B;  // n x 2mn
  Eigen::MatrixXcd C;  // 2mn x 2mn

  int size() const { return n * (2 * m + 1); }
  Eigen::MatrixXcd assembled() const;
  static CovarianceBlocks from_assembled(const Eigen::MatrixXcd& M, int n, int m);
  /// Largest |entry| in a row or column indexed by an anti-holomorphic slot.
  double antiholomorphic_max() const;
  /// Indices of the value and holomorphic-derivative components.
  std::vector<int> holomorphic_indices() const;
};

/// Row index of (point p, slot) in the assembled layout; slot as in JetSlot.
int jet_index(int n, int m, int p, JetSlot slot);

/// z / sqrt(N) for every point of a configuration given in scaled units.
std::vector<std::vector<cd>> scaled_points(const std::vector<std::vector<cd>>& z, int N);

/// Exact Delta^N at chart points x^1..x^n, from the Szego kernel and its
/// horizontal derivative kernels: (1/d_N) Pi_N and its derivatives, one
/// factor N^{-1/2} per derivative. Rejects points closer than 1e-6 in scaled
/// units (sqrt(N) |x^p - x^{p'}|); throws NumericalError when the result is
/// not Hermitian within 1e-10 or has an eigenvalue below -1e-10 lambda_max.
CovarianceBlocks covariance_exact(const KernelEvaluator& K, const std::vector<std::vector<cd>>& points);

/// Jet map J_N: row a is component a of the jet, column j the basis index,
/// so the jet of s = sum c_j S_j is J c and Delta^N = (1/d_N) J J^*.
Eigen::MatrixXcd jet_map(const KernelEvaluator& K, const std::vector<std::vector<cd>>& points);

/// Delta^infinity at scaled points z^1..z^n from the Heisenberg kernel:
///   A = k e^{psi2}
///   B = k (z^p_q' - z^p'_q') e^{psi2}
///   C = k [delta_qq' + (conj z^p'_q - conj z^p_q)(z^p_q' - z^p'_q')] e^{psi2}
/// with psi2 = psi2(z^p, z^p'), k = m! / (pi^m c1^m) and zeros in the
/// anti-holomorphic slots.
CovarianceBlocks covariance_limit(const std::vector<std::vector<cd>>& z, int m, double c1 = 1.0);

struct JPDReport {
  int m = 1;
  std::string weight;
  int N = 0;
  std::size_t dimension = 0;
  std::vector<std::vector<cd>> points;  // scaled units
  Eigen::MatrixXcd exact;
  Eigen::MatrixXcd limit;
  double max_dev = 0.0;       // entrywise max |exact - limit|
  double spectral_dev = 0.0;  // operator norm of exact - limit
  double antihol_max = 0.0;   // largest anti-holomorphic entry of exact

  // Monte Carlo part (n_samples == 0 when absent).
  std::string ensemble;
  std::size_t n_samples = 0;
  Eigen::MatrixXcd empirical;
  Eigen::MatrixXd empirical_se;  // jackknife
  double max_zscore = 0.0;       // max |empirical - exact| / se over entries with se > 0
  double kurtosis = 0.0;         // E|x^1|^4 / (E|x^1|^2)^2
  double kurtosis_se = 0.0;
  std::vector<double> marginal_histogram;  // |x^1| / sqrt(A_11), 20 bins on [0, 4]

  nlohmann::json to_json() const;
};

struct JPDSeries {
  std::vector<JPDReport> reports;
  std::string to_csv() const;  // N,max_dev,spectral_dev,n_samples
  nlohmann::json to_json() const;
};

/// Delta^N(z / sqrt N) against Delta^infinity(z) for each N (increasing).
/// The chart is centered at `base` (homogeneous).
JPDSeries scaling_convergence(int m, const std::string& weight, std::span<const cd> base,
                              const std::vector<std::vector<cd>>& z, const std::vector<int>& Ns,
                              const Parallelism& par);

/// Exact report at one N plus empirical moments of the jets of `samples`
/// random sections from `ensemble`, with jackknife errors over 20 blocks.
JPDReport empirical_jpd(const KernelEvaluator& K, const std::vector<std::vector<cd>>& z, Ensemble ensemble,
                        std::size_t samples, std::uint64_t seed, const Parallelism& par);

/// Jackknife estimate of a statistic of block means; returns (value, se).
std::pair<double, double> jackknife(const Eigen::MatrixXd& block_sums, const Eigen::VectorXd& block_counts,
                                    const std::function<double(const Eigen::VectorXd&)>& stat);

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& M);

}  // namespace szlab
