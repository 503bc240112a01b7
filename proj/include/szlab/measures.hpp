#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "szlab/model.hpp"
#include "szlab/parallel.hpp"

namespace szlab {

/// Largest number of draws any single sampling request may ask for.
inline constexpr std::size_t kMaxSamples = 10'000'000;

enum class Ensemble { sphere, gaussian, ball };

Ensemble parse_ensemble(const std::string& name);
std::string to_string(Ensemble e);

/// Random coefficient vectors c in C^d.
///   sphere:   Haar measure on the unit sphere S^{2d-1} (normalized complex Gaussian)
///   gaussian: <c_j conj(c_k)> = delta_jk / d
///   ball:     normalized Lebesgue measure on the unit ball (sphere * U^{1/(2d)})
///
/// Draw i belongs to block i / kSampleBlock; each block has its own
/// std::mt19937_64 seeded by derive_seed(seed, block). Draws therefore do not
/// depend on the worker count or on scheduling.
class EnsembleSampler {
 public:
  EnsembleSampler(Ensemble kind, std::size_t d, std::uint64_t seed);

  Ensemble kind() const { return kind_; }
  std::size_t dimension() const { return d_; }
  std::uint64_t seed() const { return seed_; }

  /// count x d matrix of draws 0..count-1.
  Eigen::MatrixXcd sample(std::size_t count, const Parallelism& par) const;

  /// Streams draws through `T` (k x d) without storing them: returns the
  /// count x k matrix of T c. Needed when d is large.
  Eigen::MatrixXcd sample_mapped(const Eigen::MatrixXcd& T, std::size_t count, const Parallelism& par) const;

 private:
  void fill_block(std::size_t block, std::size_t rows, Eigen::Ref<Eigen::MatrixXcd> out) const;
  Ensemble kind_;
  std::size_t d_;
  std::uint64_t seed_;
};

/// Uniform points on the real unit sphere S^{d-1}, projected to the first k
/// coordinates (count x k). Same block-seeding contract as EnsembleSampler.
Eigen::MatrixXd sample_real_sphere_projection(std::size_t d, std::size_t k, std::size_t count,
                                              std::uint64_t seed, const Parallelism& par);

/// Centered Gaussian with PSD covariance, possibly singular.
///
/// Complex case: x = F xi with xi standard complex normal, so <x x^*> = Delta
/// and E exp(i Re <x, t>) = exp(-t^* Delta t / 4). Real case: <x x^T> = Delta
/// and E exp(i <x, t>) = exp(-<Delta t, t> / 2).
class GeneralizedGaussian {
 public:
  /// Rejects non-Hermitian input (tolerance 1e-10 relative to the largest
  /// entry) and eigenvalues below -1e-12 * max(1, lambda_max); clamps
  /// eigenvalues below 1e-12 * lambda_max to zero.
  static GeneralizedGaussian complex(const Eigen::MatrixXcd& Delta);
  static GeneralizedGaussian real(const Eigen::MatrixXd& Delta);

  bool is_complex() const { return complex_; }
  Eigen::Index dimension() const { return Delta_.rows(); }
  const Eigen::MatrixXcd& covariance() const { return Delta_; }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXcd& eigenvectors() const { return V_; }
  int rank() const;
  /// Orthonormal basis (columns) of the support.
  Eigen::MatrixXcd support() const;
  /// V diag(sqrt lambda) V^*... returned as the factor F with F F^* = Delta.
  const Eigen::MatrixXcd& factor() const { return F_; }

  cd characteristic_function(const Eigen::VectorXcd& t) const;

  Eigen::MatrixXcd sample(std::size_t count, std::uint64_t seed, const Parallelism& par) const;

 private:
  GeneralizedGaussian() = default;
  static GeneralizedGaussian build(const Eigen::MatrixXcd& Delta, bool complex);
  bool complex_ = true;
  Eigen::MatrixXcd Delta_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXcd V_;
  Eigen::MatrixXcd F_;
};

/// gamma_{T Delta T^*}. Real input stays real when T is real.
GeneralizedGaussian pushforward(const Eigen::MatrixXcd& T, const GeneralizedGaussian& g);

/// (1 - lambda^2)^{d-1}: probability that |c_1| > lambda on S^{2d-1} in C^d.
double sphere_tail_prob(double lambda, int d);

/// Surface area of S^{n-1} in R^n: 2 pi^{n/2} / Gamma(n/2).
double sphere_area(double n);

/// Density on R^k of sqrt(d) (x_1..x_k) for x uniform on S^{d-1} in R^d:
/// sigma_{d-k} / (sigma_d d^{k/2}) (1 - |x|^2/d)^{(d-k-2)/2} on |x| < sqrt d.
/// Requires d >= k + 2.
double sphere_projection_density(std::span<const double> x, int d, int k);

/// Standard normal CDF.
double normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov statistic against N(0, sigma^2).
double ks_normal(std::vector<double> sample, double sigma = 1.0);
/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Energy distance between the rows of X and Y (real), using at most
/// `max_rows` rows of each (V-statistic, so it is >= 0 and vanishes for X = Y).
double energy_distance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, std::size_t max_rows = 2000);

/// Rows of complex samples as real vectors (re_1, im_1, re_2, ...).
Eigen::MatrixXd realify(const Eigen::MatrixXcd& X);

struct PushforwardComparison {
  std::size_t d = 0;
  double energy = 0.0;        // energy distance between T_* nu_d and gamma_Delta samples
  double max_ks = 0.0;        // max over real coordinates with positive limit variance
  Eigen::VectorXd variance;   // sample variance per real coordinate of T_* nu_d
};

/// Compares T_N push-forwards of the sphere measure nu_{d_N} with gamma_Delta
/// for each member of the family (T_N is k x d_N).
std::vector<PushforwardComparison> spherical_vs_gaussian_check(const std::vector<Eigen::MatrixXcd>& family,
                                                               const Eigen::MatrixXcd& Delta,
                                                               std::size_t samples, std::uint64_t seed,
                                                               const Parallelism& par);

/// Monte Carlo mean and standard error of f under gamma.
struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};
McEstimate expectation(const GeneralizedGaussian& g, const std::function<double(const Eigen::VectorXcd&)>& f,
                       std::size_t samples, std::uint64_t seed, const Parallelism& par);

/// Sample covariance and entrywise standard errors (rows are draws, mean zero).
struct MomentEstimate {
  Eigen::MatrixXcd mean;   // (1/n) sum x x^*
  Eigen::MatrixXd stderr_; // entrywise, combining real and imaginary parts
};
MomentEstimate second_moments(const Eigen::MatrixXcd& X);

/// Little-endian float64, re/im interleaved, row-major (count x d).
void write_samples_binary(const std::string& path, const Eigen::MatrixXcd& X);
void write_samples_csv(const std::string& path, const Eigen::MatrixXcd& X);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// All measure-level invariants, each as a pass/fail line.
std::vector<CheckResult> measure_selftest(std::uint64_t seed, const Parallelism& par);

}  // namespace szlab
