#include "szlab/measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "szlab/errors.hpp"
#include "szlab/quadrature.hpp"

namespace szlab {

namespace {

using std::numbers::pi;

std::size_t block_count(std::size_t count) { return (count + kSampleBlock - 1) / kSampleBlock; }

void check_count(std::size_t count) {
  if (count < 1) throw DomainError("sample count must be >= 1");
  if (count > kMaxSamples)
    throw ResourceCapError("sample count " + std::to_string(count) + " exceeds cap " + std::to_string(kMaxSamples));
}

// Standard complex normal: E|xi|^2 = 1.
cd complex_normal(std::mt19937_64& rng, std::normal_distribution<double>& n01) {
  const double s = std::sqrt(0.5);
  double re = n01(rng);
  double im = n01(rng);
  return {s * re, s * im};
}

template <class F>
void for_each_block(std::size_t count, const Parallelism& par, F&& fn) {
  const auto blocks = static_cast<std::int64_t>(block_count(count));
#pragma omp parallel for num_threads(std::max(1, par.workers)) schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::size_t first = static_cast<std::size_t>(b) * kSampleBlock;
    const std::size_t rows = std::min(kSampleBlock, count - first);
    fn(static_cast<std::size_t>(b), first, rows);
  }
}

void write_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

}  // namespace

Ensemble parse_ensemble(const std::string& name) {
  if (name == "sphere") return Ensemble::sphere;
  if (name == "gaussian") return Ensemble::gaussian;
  if (name == "ball") return Ensemble::ball;
  throw DomainError("unknown ensemble '" + name + "' (expected sphere | gaussian | ball)");
}

std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::sphere: return "sphere";
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::ball: return "ball";
  }
  return "?";
}

EnsembleSampler::EnsembleSampler(Ensemble kind, std::size_t d, std::uint64_t seed) : kind_(kind), d_(d), seed_(seed) {
  if (d < 1) throw DomainError("ensemble dimension must be >= 1");
}

void EnsembleSampler::fill_block(std::size_t block, std::size_t rows, Eigen::Ref<Eigen::MatrixXcd> out) const {
  std::mt19937_64 rng(derive_seed(seed_, block));
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  const auto d = static_cast<Eigen::Index>(d_);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = out.row(static_cast<Eigen::Index>(r));
    for (Eigen::Index j = 0; j < d; ++j) row(j) = complex_normal(rng, n01);
    switch (kind_) {
      case Ensemble::sphere: row /= row.norm(); break;
      case Ensemble::gaussian: row /= std::sqrt(static_cast<double>(d_)); break;
      case Ensemble::ball: {
        double radius = std::pow(u01(rng), 1.0 / (2.0 * static_cast<double>(d_)));
        row *= radius / row.norm();
        break;
      }
    }
  }
}

Eigen::MatrixXcd EnsembleSampler::sample(std::size_t count, const Parallelism& par) const {
  check_count(count);
  if (count * d_ > kMaxSamples * 16)
    throw ResourceCapError("sample batch too large; use sample_mapped for large dimensions");
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d_));
  for_each_block(count, par, [&](std::size_t b, std::size_t first, std::size_t rows) {
    fill_block(b, rows, out.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows)));
  });
  return out;
}

Eigen::MatrixXcd EnsembleSampler::sample_mapped(const Eigen::MatrixXcd& T, std::size_t count,
                                                const Parallelism& par) const {
  check_count(count);
  if (static_cast<std::size_t>(T.cols()) != d_) throw DomainError("map input dimension does not match ensemble");
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(count), T.rows());
  for_each_block(count, par, [&](std::size_t b, std::size_t first, std::size_t rows) {
    Eigen::MatrixXcd buf(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d_));
    fill_block(b, rows, buf);
    out.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows)) = buf * T.transpose();
  });
  return out;
}

Eigen::MatrixXd sample_real_sphere_projection(std::size_t d, std::size_t k, std::size_t count, std::uint64_t seed,
                                              const Parallelism& par) {
  check_count(count);
  if (d < 1 || k < 1 || k > d) throw DomainError("need 1 <= k <= d");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(k));
  for_each_block(count, par, [&](std::size_t b, std::size_t first, std::size_t rows) {
    std::mt19937_64 rng(derive_seed(seed, b));
    std::normal_distribution<double> n01;
    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < rows; ++r) {
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = n01(rng);
      x /= x.norm();
      out.row(static_cast<Eigen::Index>(first + r)) = x.head(static_cast<Eigen::Index>(k)).transpose();
    }
  });
  return out;
}

// ---------------------------------------------------------------- Gaussians

GeneralizedGaussian GeneralizedGaussian::build(const Eigen::MatrixXcd& Delta, bool complex) {
  if (Delta.rows() != Delta.cols() || Delta.rows() < 1) throw DomainError("covariance must be a non-empty square matrix");
  if (!Delta.allFinite()) throw DomainError("covariance has non-finite entries");
  const double scale = std::max(1.0, Delta.cwiseAbs().maxCoeff());
  if ((Delta - Delta.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError("covariance is not Hermitian within 1e-10");
  GeneralizedGaussian g;
  g.complex_ = complex;
  g.Delta_ = 0.5 * (Delta + Delta.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.Delta_);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of covariance failed");
  g.lambda_ = es.eigenvalues();
  g.V_ = es.eigenvectors();
  const double lmax = std::max(0.0, g.lambda_.maxCoeff());
  if (g.lambda_.minCoeff() < -1e-12 * std::max(1.0, lmax))
    throw DomainError("covariance is indefinite: eigenvalue " + std::to_string(g.lambda_.minCoeff()));
  for (Eigen::Index i = 0; i < g.lambda_.size(); ++i)
    if (g.lambda_(i) < 1e-12 * lmax || g.lambda_(i) <= 0.0) g.lambda_(i) = 0.0;
  g.F_ = g.V_ * g.lambda_.cwiseSqrt().asDiagonal();
  // A zero diagonal entry of a PSD matrix forces the whole coordinate to vanish.
  for (Eigen::Index i = 0; i < g.Delta_.rows(); ++i)
    if (g.Delta_(i, i) == 0.0) g.F_.row(i).setZero();
  return g;
}

GeneralizedGaussian GeneralizedGaussian::complex(const Eigen::MatrixXcd& Delta) { return build(Delta, true); }

GeneralizedGaussian GeneralizedGaussian::real(const Eigen::MatrixXd& Delta) {
  GeneralizedGaussian g = build(Delta.cast<cd>(), false);
  // Real symmetric input: use a real orthonormal eigenbasis.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.Delta_.real());
  g.V_ = es.eigenvectors().cast<cd>();
  g.F_ = (es.eigenvectors() * g.lambda_.cwiseSqrt().asDiagonal()).cast<cd>();
  for (Eigen::Index i = 0; i < g.Delta_.rows(); ++i)
    if (g.Delta_(i, i) == 0.0) g.F_.row(i).setZero();
  return g;
}

int GeneralizedGaussian::rank() const { return static_cast<int>((lambda_.array() > 0.0).count()); }

Eigen::MatrixXcd GeneralizedGaussian::support() const {
  Eigen::MatrixXcd S(V_.rows(), rank());
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i)
    if (lambda_(i) > 0.0) S.col(c++) = V_.col(i);
  return S;
}

cd GeneralizedGaussian::characteristic_function(const Eigen::VectorXcd& t) const {
  if (t.size() != Delta_.rows()) throw DomainError("characteristic function argument has wrong dimension");
  if (!complex_) {
    Eigen::VectorXd tr = t.real();
    return std::exp(-0.5 * tr.dot(Delta_.real() * tr));
  }
  return std::exp(-0.25 * t.dot(Delta_ * t).real());
}

Eigen::MatrixXcd GeneralizedGaussian::sample(std::size_t count, std::uint64_t seed, const Parallelism& par) const {
  check_count(count);
  const Eigen::Index n = Delta_.rows();
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(count), n);
  for_each_block(count, par, [&](std::size_t b, std::size_t first, std::size_t rows) {
    std::mt19937_64 rng(derive_seed(seed, b));
    std::normal_distribution<double> n01;
    Eigen::MatrixXcd xi(n, static_cast<Eigen::Index>(rows));
    for (Eigen::Index r = 0; r < xi.cols(); ++r)
      for (Eigen::Index j = 0; j < n; ++j) xi(j, r) = complex_ ? complex_normal(rng, n01) : cd(n01(rng), 0.0);
    out.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(rows)) = (F_ * xi).transpose();
  });
  return out;
}

GeneralizedGaussian pushforward(const Eigen::MatrixXcd& T, const GeneralizedGaussian& g) {
  if (T.cols() != g.dimension()) throw DomainError("pushforward map has wrong input dimension");
  Eigen::MatrixXcd D = T * g.covariance() * T.adjoint();
  if (!g.is_complex() && T.imag().cwiseAbs().maxCoeff() == 0.0) return GeneralizedGaussian::real(D.real());
  return GeneralizedGaussian::complex(D);
}

// ------------------------------------------------------- closed forms

double sphere_tail_prob(double lambda, int d) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("tail threshold must lie in [0, 1)");
  if (d < 2) throw DomainError("tail law needs d >= 2");
  return std::pow(1.0 - lambda * lambda, d - 1);
}

double sphere_area(double n) { return 2.0 * std::pow(pi, n / 2.0) / std::tgamma(n / 2.0); }

double sphere_projection_density(std::span<const double> x, int d, int k) {
  if (k < 1 || static_cast<int>(x.size()) != k) throw DomainError("point must lie in R^k, k >= 1");
  if (d < k + 2) throw DomainError("projection density needs d >= k + 2");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  if (r2 >= d) return 0.0;
  const double dd = d, kk = k;
  // log(sigma_{d-k} / sigma_d) = -(k/2) log pi + lgamma(d/2) - lgamma((d-k)/2)
  double logc = -0.5 * kk * std::log(pi) + std::lgamma(dd / 2) - std::lgamma((dd - kk) / 2) - 0.5 * kk * std::log(dd);
  double e = (dd - kk - 2) / 2;
  return std::exp(logc + (e == 0.0 ? 0.0 : e * std::log1p(-r2 / dd)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_normal(std::vector<double> s, double sigma) {
  if (s.empty()) throw DomainError("KS statistic of an empty sample");
  if (!(sigma > 0.0)) throw DomainError("KS reference scale must be positive");
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double D = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double F = normal_cdf(s[i] / sigma);
    D = std::max({D, (i + 1) / n - F, F - i / n});
  }
  return D;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  return D;
}

double energy_distance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, std::size_t max_rows) {
  if (X.cols() != Y.cols()) throw DomainError("energy distance needs equal dimensions");
  const Eigen::Index n = std::min<Eigen::Index>(X.rows(), static_cast<Eigen::Index>(max_rows));
  const Eigen::Index m = std::min<Eigen::Index>(Y.rows(), static_cast<Eigen::Index>(max_rows));
  if (n < 2 || m < 2) throw DomainError("energy distance needs at least two rows per sample");
  auto mean_dist = [](const Eigen::MatrixXd& A, Eigen::Index na, const Eigen::MatrixXd& B, Eigen::Index nb, bool same) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = same ? i + 1 : 0; j < nb; ++j) s += (A.row(i) - B.row(j)).norm();
    if (same) s *= 2.0;
    return s / (static_cast<double>(na) * static_cast<double>(nb));
  };
  return 2.0 * mean_dist(X, n, Y, m, false) - mean_dist(X, n, X, n, true) - mean_dist(Y, m, Y, m, true);
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& X) {
  Eigen::MatrixXd R(X.rows(), 2 * X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    R.col(2 * j) = X.col(j).real();
    R.col(2 * j + 1) = X.col(j).imag();
  }
  return R;
}

std::vector<PushforwardComparison> spherical_vs_gaussian_check(const std::vector<Eigen::MatrixXcd>& family,
                                                               const Eigen::MatrixXcd& Delta, std::size_t samples,
                                                               std::uint64_t seed, const Parallelism& par) {
  auto limit = GeneralizedGaussian::complex(Delta);
  std::vector<PushforwardComparison> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& T = family[i];
    if (T.rows() != Delta.rows()) throw DomainError("family member has wrong output dimension");
    EnsembleSampler nu(Ensemble::sphere, static_cast<std::size_t>(T.cols()), derive_seed(seed, 2 * i));
    Eigen::MatrixXd P = realify(nu.sample_mapped(T, samples, par));
    Eigen::MatrixXd G = realify(limit.sample(samples, derive_seed(seed, 2 * i + 1), par));
    PushforwardComparison c;
    c.d = static_cast<std::size_t>(T.cols());
    c.energy = energy_distance(P, G);
    c.variance = P.colwise().squaredNorm().transpose() / static_cast<double>(P.rows());
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      double var = 0.5 * limit.covariance()(j / 2, j / 2).real();
      if (var <= 1e-12) continue;
      std::vector<double> col(P.col(j).data(), P.col(j).data() + P.rows());
      c.max_ks = std::max(c.max_ks, ks_normal(std::move(col), std::sqrt(var)));
    }
    out.push_back(std::move(c));
  }
  return out;
}

McEstimate expectation(const GeneralizedGaussian& g, const std::function<double(const Eigen::VectorXcd&)>& f,
                       std::size_t samples, std::uint64_t seed, const Parallelism& par) {
  Eigen::MatrixXcd X = g.sample(samples, seed, par);
  Eigen::VectorXd v(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) v(i) = f(X.row(i).transpose());
  const double n = static_cast<double>(v.size());
  McEstimate e;
  e.mean = v.mean();
  e.stderr_ = n > 1 ? std::sqrt((v.array() - e.mean).square().sum() / (n - 1) / n) : 0.0;
  return e;
}

MomentEstimate second_moments(const Eigen::MatrixXcd& X) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (n < 2) throw DomainError("need at least two draws for moment errors");
  MomentEstimate est;
  est.mean = X.transpose() * X.conjugate() / static_cast<double>(n);
  est.stderr_.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      Eigen::VectorXcd v = X.col(a).cwiseProduct(X.col(b).conjugate());
      cd mu = est.mean(a, b);
      double vr = (v.real().array() - mu.real()).square().sum() / static_cast<double>(n - 1);
      double vi = (v.imag().array() - mu.imag()).square().sum() / static_cast<double>(n - 1);
      est.stderr_(a, b) = std::sqrt((vr + vi) / static_cast<double>(n));
    }
  return est;
}

void write_samples_binary(const std::string& path, const Eigen::MatrixXcd& X) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      write_le(os, X(i, j).real());
      write_le(os, X(i, j).imag());
    }
  if (!os) throw DomainError("write to " + path + " failed");
}

void write_samples_csv(const std::string& path, const Eigen::MatrixXcd& X) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open " + path + " for writing");
  for (Eigen::Index j = 0; j < X.cols(); ++j) os << (j ? "," : "") << "re_" << j << ",im_" << j;
  os << "\r\n";
  char buf[64];
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.16e,%.16e", j ? "," : "", X(i, j).real(), X(i, j).imag());
      os << buf;
    }
    os << "\r\n";
  }
  if (!os) throw DomainError("write to " + path + " failed");
}

// -------------------------------------------------------------- self-test

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Integral of sphere_projection_density over R^k in polar form with
// r = sqrt(d) sin(t): the integrand becomes analytic on [0, pi/2].
double projection_density_mass(int d, int k) {
  std::vector<double> x, w;
  gauss_legendre01(200, x, w);
  std::vector<double> pt(static_cast<std::size_t>(k), 0.0);
  const double sd = std::sqrt(static_cast<double>(d));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = 0.5 * pi * x[i];
    double r = sd * std::sin(t);
    pt[0] = r;
    s += 0.5 * pi * w[i] * std::pow(r, k - 1) * sphere_projection_density(pt, d, k) * sd * std::cos(t);
  }
  return sphere_area(k) * s;
}

bool within(double est, double target, double se, double nsig = 4.0) { return std::abs(est - target) <= nsig * se; }

}  // namespace

std::vector<CheckResult> measure_selftest(std::uint64_t seed, const Parallelism& par) {
  std::vector<CheckResult> out;
  std::uint64_t stream = 0;
  auto next_seed = [&] { return derive_seed(seed, stream++); };
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };

  {  // sphere samples
    auto X = EnsembleSampler(Ensemble::sphere, 7, next_seed()).sample(2000, par);
    double dev = (X.rowwise().norm().array() - 1.0).abs().maxCoeff();
    add("sphere_unit_norm", dev <= 1e-12, fmt("max | |c| - 1 | = %.3e", dev));
    auto S1 = EnsembleSampler(Ensemble::sphere, 1, next_seed()).sample(1000, par);
    double dev1 = (S1.cwiseAbs().array() - 1.0).abs().maxCoeff();
    add("sphere_d1_unit_modulus", dev1 <= 1e-15, fmt("max | |c| - 1 | = %.3e", dev1));
  }
  {  // exchangeability: <|c_1|^2> = 1/4 on S^7 and identical marginals
    auto X = EnsembleSampler(Ensemble::sphere, 4, next_seed()).sample(100000, par);
    Eigen::VectorXd a = X.col(0).cwiseAbs2();
    double mu = a.mean();
    double se = std::sqrt((a.array() - mu).square().sum() / (a.size() - 1.0) / a.size());
    add("sphere_mean_c1_squared", within(mu, 0.25, se), fmt("mean %.6f, target 0.25, se %.2e", mu, se));
    std::vector<double> m0(a.data(), a.data() + a.size());
    Eigen::VectorXd b = X.col(2).cwiseAbs2();
    std::vector<double> m2(b.data(), b.data() + b.size());
    double D = ks_two_sample(m0, m2);
    double crit = 1.95 * std::sqrt(2.0 / a.size());
    add("sphere_marginals_exchangeable", D < crit, fmt("two-sample KS %.4f < %.4f", D, crit));
  }
  {  // normalized Gaussian
    auto X = EnsembleSampler(Ensemble::gaussian, 100, next_seed()).sample(20000, par);
    Eigen::VectorXd r = X.rowwise().squaredNorm();
    double mu = r.mean();
    double se = std::sqrt((r.array() - mu).square().sum() / (r.size() - 1.0) / r.size());
    add("gaussian_mean_norm_squared", within(mu, 1.0, se), fmt("mean %.5f, target 1, se %.2e", mu, se));
    auto M = second_moments(X.leftCols(3));
    Eigen::MatrixXd z = (M.mean - Eigen::MatrixXcd::Identity(3, 3) / 100.0).cwiseAbs();
    bool ok = (z.array() <= 4.0 * M.stderr_.array()).all();
    add("gaussian_coefficient_covariance", ok, fmt("max |<c_j conj c_k> - delta/d| = %.2e", z.maxCoeff()));
  }
  {  // ball
    const int d = 5;
    auto X = EnsembleSampler(Ensemble::ball, d, next_seed()).sample(50000, par);
    Eigen::VectorXd r = X.rowwise().squaredNorm();
    double mu = r.mean();
    double se = std::sqrt((r.array() - mu).square().sum() / (r.size() - 1.0) / r.size());
    bool inside = r.maxCoeff() <= 1.0 + 1e-15;
    add("ball_radial_law", inside && within(mu, d / (d + 1.0), se),
        fmt("max |c|^2 = %.6f, mean |c|^2 = %.5f (target %.5f)", r.maxCoeff(), mu, d / (d + 1.0)));
  }
  {  // tail law
    const std::pair<int, double> cases[] = {{3, 0.5}, {4, 0.3}, {10, 0.2}};
    for (auto [d, lam] : cases) {
      auto X = EnsembleSampler(Ensemble::sphere, static_cast<std::size_t>(d), next_seed()).sample(100000, par);
      double hits = (X.col(0).cwiseAbs().array() > lam).count();
      double n = static_cast<double>(X.rows());
      double p = sphere_tail_prob(lam, d);
      double freq = hits / n;
      double se = std::sqrt(p * (1 - p) / n);
      add("tail_law_d" + std::to_string(d), within(freq, p, se),
          fmt("frequency %.5f vs (1-l^2)^(d-1) = %.5f, sigma %.2e", freq, p, se));
    }
    bool closed = sphere_tail_prob(0.0, 5) == 1.0 && std::abs(sphere_tail_prob(0.5, 3) - 0.5625) < 1e-15;
    add("tail_law_closed_form", closed, "lambda = 0 gives 1; (0.5, 3) gives 0.5625");
  }
  {  // Poincare-Borel
    const std::size_t d = 2000;
    auto P = sample_real_sphere_projection(d, 2, 10000, next_seed(), par);
    P *= std::sqrt(static_cast<double>(d));
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) {
      std::vector<double> col(P.col(j).data(), P.col(j).data() + P.rows());
      worst = std::max(worst, ks_normal(std::move(col)));
    }
    add("poincare_borel_ks", worst < 0.02, fmt("max per-coordinate KS %.4f (threshold 0.02)", worst));
  }
  {  // pushforward
    Eigen::MatrixXcd Delta(3, 3);
    Delta << 2.0, cd(0.5, 0.3), 0.1, cd(0.5, -0.3), 1.0, cd(0.0, 0.2), 0.1, cd(0.0, -0.2), 0.7;
    Eigen::MatrixXcd T(2, 3);
    T << 1.0, cd(0.0, 1.0), -0.5, cd(0.3, 0.3), 2.0, 1.0;
    auto g = GeneralizedGaussian::complex(Delta);
    auto pg = pushforward(T, g);
    Eigen::MatrixXcd expect = T * Delta * T.adjoint();
    double exact = (pg.covariance() - expect).cwiseAbs().maxCoeff();
    Eigen::MatrixXcd row(1, 2);
    row << 1.0, 1.0;
    auto v2 = pushforward(row, GeneralizedGaussian::complex(Eigen::MatrixXcd::Identity(2, 2)));
    bool small = std::abs(v2.covariance()(0, 0) - 2.0) < 1e-15;
    auto id = pushforward(Eigen::MatrixXcd::Identity(3, 3), g);
    double iddev = (id.covariance() - Delta).cwiseAbs().maxCoeff();
    add("pushforward_covariance_exact", exact <= 1e-12 && small && iddev <= 1e-15,
        fmt("|cov - T Delta T*| = %.2e; (1,1) push of I = 2; identity deviation %.1e", exact, iddev));
    Eigen::MatrixXcd Y = g.sample(10000, next_seed(), par) * T.transpose();
    auto M = second_moments(Y);
    Eigen::ArrayXXd z = (M.mean - expect).cwiseAbs().array() / M.stderr_.array();
    add("pushforward_covariance_mc", (z <= 4.0).all(), fmt("max deviation %.2f standard errors", z.maxCoeff()));
  }
  {  // projection density
    bool mass_ok = true;
    double worst = 0.0;
    const std::pair<int, int> dk[] = {{3, 1}, {4, 1}, {7, 1}, {4, 2}, {10, 2}, {50, 2}, {200, 3}};
    for (auto [d, k] : dk) {
      double e = std::abs(projection_density_mass(d, k) - 1.0);
      worst = std::max(worst, e);
      mass_ok = mass_ok && e < 1e-8;
    }
    add("projection_density_mass", mass_ok, fmt("max |integral - 1| = %.2e", worst));
    std::vector<double> x0{0.0};
    double arch = sphere_projection_density(x0, 3, 1);
    add("projection_density_archimedes", std::abs(arch - 1.0 / (2.0 * std::sqrt(3.0))) < 1e-14,
        fmt("d=3, k=1, x=0 gives %.12f", arch));
    std::vector<double> x{0.7, -0.4};
    double lim = std::exp(-0.5 * 0.65) / (2 * pi);
    double far = sphere_projection_density(x, 1000000, 2);
    add("projection_density_gaussian_limit", std::abs(far / lim - 1.0) < 1e-5,
        fmt("d=1e6 relative deviation from Gaussian %.2e", std::abs(far / lim - 1.0)));
  }
  {  // generalized Gaussians
    auto zero = GeneralizedGaussian::complex(Eigen::MatrixXcd::Zero(2, 2));
    auto Z = zero.sample(100, next_seed(), par);
    add("gaussian_zero_covariance_point_mass", Z.cwiseAbs().maxCoeff() == 0.0 && zero.rank() == 0,
        "all samples are exactly 0");
    Eigen::MatrixXd D10 = Eigen::MatrixXd::Zero(2, 2);
    D10(0, 0) = 1.0;
    auto g10 = GeneralizedGaussian::real(D10);
    auto S = g10.sample(1000, next_seed(), par);
    add("gaussian_support_restriction", S.col(1).cwiseAbs().maxCoeff() == 0.0 && g10.rank() == 1,
        "second coordinate identically zero");
    auto gi = GeneralizedGaussian::complex(Eigen::MatrixXcd::Identity(2, 2));
    auto M = second_moments(gi.sample(20000, next_seed(), par));
    Eigen::ArrayXXd z = (M.mean - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().array() / M.stderr_.array();
    add("gaussian_moment_identity", (z <= 4.0).all(), fmt("max deviation %.2f standard errors", z.maxCoeff()));
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Random(4, 2);
    Eigen::MatrixXcd Dl = A * A.adjoint();
    auto gl = GeneralizedGaussian::complex(Dl);
    double fac = (gl.factor() * gl.factor().adjoint() - Dl).cwiseAbs().maxCoeff();
    add("gaussian_factorization", fac <= 1e-10 && gl.rank() == 2, fmt("|F F* - Delta| = %.2e, rank 2", fac));
    bool rejects = false, rejects2 = false;
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
    bad(0, 1) = 0.5;
    try {
      GeneralizedGaussian::complex(bad);
    } catch (const DomainError&) {
      rejects = true;
    }
    Eigen::MatrixXcd neg = Eigen::MatrixXcd::Identity(2, 2);
    neg(1, 1) = -1e-6;
    try {
      GeneralizedGaussian::complex(neg);
    } catch (const DomainError&) {
      rejects2 = true;
    }
    add("gaussian_rejects_invalid", rejects && rejects2, "non-Hermitian and indefinite inputs raise");
    Eigen::VectorXcd t(4);
    t << 0.3, cd(0.0, -0.2), cd(0.1, 0.4), -0.5;
    auto X = gl.sample(40000, next_seed(), par);
    Eigen::ArrayXd phase = (X * t.conjugate()).real().array();
    double re = phase.cos().mean(), im = phase.sin().mean();
    double se = std::sqrt(1.0 / X.rows());
    cd cf = gl.characteristic_function(t);
    add("gaussian_characteristic_function", std::abs(re - cf.real()) < 4 * se && std::abs(im) < 4 * se,
        fmt("E exp(i Re<x,t>) = %.4f vs %.4f", re, cf.real()));
  }
  {  // determinism
    EnsembleSampler s(Ensemble::sphere, 6, next_seed());
    auto a = s.sample(3000, Parallelism{1});
    auto b = s.sample(3000, Parallelism{3});
    auto c = s.sample(1000, Parallelism{2});
    bool same = (a.array() == b.array()).all() && (a.topRows(1000).array() == c.array()).all();
    add("sampling_deterministic", same, "bit-identical streams for 1, 2, 3 workers and prefix-stable");
  }
  {  // continuity of Delta -> gamma_Delta
    Eigen::MatrixXcd D0(2, 2);
    D0 << 0.3, cd(0.1, 0.05), cd(0.1, -0.05), 0.2;
    Eigen::MatrixXcd E(2, 2);
    E << 0.2, 0.1, 0.1, -0.1;
    auto bump = [](const Eigen::VectorXcd& x) {
      double r2 = x.squaredNorm();
      return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    };
    const std::uint64_t s0 = next_seed();
    auto I0 = expectation(GeneralizedGaussian::complex(D0), bump, 40000, s0, par);
    std::string detail;
    bool ok = true;
    for (int N : {1, 8, 64, 512}) {
      auto IN = expectation(GeneralizedGaussian::complex(D0 + E / static_cast<double>(N)), bump, 40000,
                            derive_seed(s0, static_cast<std::uint64_t>(N)), par);
      double diff = std::abs(IN.mean - I0.mean);
      double comb = std::hypot(IN.stderr_, I0.stderr_);
      if (N == 512) ok = ok && diff <= 4 * comb;
      detail += fmt("N=%g: |I_N - I_0| = %.2e (se %.1e); ", N, diff, comb);
    }
    add("gaussian_continuity", ok, detail);
  }
  {  // spherical vs Gaussian with a rank-deficient limit
    std::vector<Eigen::MatrixXcd> fam;
    for (int d : {8, 64, 512}) {
      Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(2, d);
      const double sd = std::sqrt(static_cast<double>(d));
      T(0, 0) = sd;
      T(1, 1) = sd * std::pow(static_cast<double>(d), -0.25);
      fam.push_back(T);
    }
    Eigen::MatrixXcd Delta = Eigen::MatrixXcd::Zero(2, 2);
    Delta(0, 0) = 1.0;
    auto rep = spherical_vs_gaussian_check(fam, Delta, 3000, next_seed(), par);
    bool shrinking = rep[0].variance(2) > rep[1].variance(2) && rep[1].variance(2) > rep[2].variance(2);
    bool energy = rep[2].energy < rep[0].energy;
    add("spherical_vs_gaussian_degenerate", shrinking && energy,
        fmt("coordinate-2 variance %.3e -> %.3e", rep[0].variance(2), rep[2].variance(2)) +
            fmt("; energy %.2e -> %.2e", rep[0].energy, rep[2].energy));
    std::vector<Eigen::MatrixXcd> z{Eigen::MatrixXcd::Zero(2, 16)};
    auto rz = spherical_vs_gaussian_check(z, Eigen::MatrixXcd::Zero(2, 2), 500, next_seed(), par);
    add("spherical_vs_gaussian_zero", rz[0].variance.maxCoeff() == 0.0 && rz[0].energy == 0.0,
        "pushed samples concentrate at the origin");
  }
  return out;
}

}  // namespace szlab
