#include "szlab/jpd.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "szlab/errors.hpp"

namespace szlab {

namespace {

constexpr int kJackknifeBlocks = 20;

void validate_covariance(const Eigen::MatrixXcd& M, const char* what) {
  const double scale = std::max(1e-300, M.cwiseAbs().maxCoeff());
  if ((M - M.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericalError(std::string(what) + ": covariance is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (M + M.adjoint()), Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(lmax, 1e-300))
    throw NumericalError(std::string(what) + ": covariance is not positive semidefinite (min eigenvalue " +
                         std::to_string(es.eigenvalues().minCoeff()) + ")");
}

void check_points(const std::vector<std::vector<cd>>& pts, int m) {
  if (pts.empty()) throw DomainError("configuration needs at least one point");
  for (const auto& p : pts)
    if (static_cast<int>(p.size()) != m) throw DomainError("configuration point has wrong dimension");
  if (static_cast<int>(pts.size()) * (2 * m + 1) > kMaxJetComponents)
    throw ResourceCapError("configuration exceeds " + std::to_string(kMaxJetComponents) + " jet components");
}

double distance(const std::vector<cd>& a, const std::vector<cd>& b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s += std::norm(a[q] - b[q]);
  return std::sqrt(s);
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

// ------------------------------------------------------------------ blocks

Eigen::MatrixXcd CovarianceBlocks::assembled() const {
  const int s = size();
  Eigen::MatrixXcd M(s, s);
  M.topLeftCorner(n, n) = A;
  M.topRightCorner(n, s - n) = B;
  M.bottomLeftCorner(s - n, n) = B.adjoint();
  M.bottomRightCorner(s - n, s - n) = C;
  return M;
}

CovarianceBlocks CovarianceBlocks::from_assembled(const Eigen::MatrixXcd& M, int n, int m) {
  CovarianceBlocks b;
  b.n = n;
  b.m = m;
  const int s = b.size();
  if (M.rows() != s || M.cols() != s) throw DomainError("assembled covariance has wrong size");
  b.A = M.topLeftCorner(n, n);
  b.B = M.topRightCorner(n, s - n);
  b.C = M.bottomRightCorner(s - n, s - n);
  return b;
}

int jet_index(int n, int m, int p, JetSlot slot) { return slot == 0 ? p : n + 2 * m * p + (slot - 1); }

std::vector<int> CovarianceBlocks::holomorphic_indices() const {
  std::vector<int> idx;
  for (int p = 0; p < n; ++p) idx.push_back(p);
  for (int p = 0; p < n; ++p)
    for (int q = 1; q <= m; ++q) idx.push_back(jet_index(n, m, p, q));
  return idx;
}

double CovarianceBlocks::antiholomorphic_max() const {
  Eigen::MatrixXcd M = assembled();
  double worst = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = m + 1; q <= 2 * m; ++q) {
      int i = jet_index(n, m, p, q);
      worst = std::max({worst, M.row(i).cwiseAbs().maxCoeff(), M.col(i).cwiseAbs().maxCoeff()});
    }
  return worst;
}

std::vector<std::vector<cd>> scaled_points(const std::vector<std::vector<cd>>& z, int N) {
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  auto out = z;
  for (auto& p : out)
    for (auto& c : p) c *= s;
  return out;
}

// ------------------------------------------------------------ exact route

CovarianceBlocks covariance_exact(const KernelEvaluator& K, const std::vector<std::vector<cd>>& points) {
  const int m = K.basis().m();
  const int N = K.basis().N();
  check_points(points, m);
  const int n = static_cast<int>(points.size());
  const double sqrtN = std::sqrt(static_cast<double>(N));
  for (int p = 0; p < n; ++p)
    for (int r = p + 1; r < n; ++r)
      if (sqrtN * distance(points[p], points[r]) < 1e-6)
        throw DomainError("configuration points closer than 1e-6 in scaled units");
  const double d = static_cast<double>(K.basis().dimension());
  std::vector<BundlePoint> x;
  for (const auto& p : points) x.push_back({p, 0.0});
  const int s = n * (2 * m + 1);
  Eigen::MatrixXcd M(s, s);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r)
      for (JetSlot a = 0; a <= 2 * m; ++a)
        for (JetSlot b = 0; b <= 2 * m; ++b) {
          double f = std::pow(sqrtN, -((a > 0) + (b > 0)));
          M(jet_index(n, m, p, a), jet_index(n, m, r, b)) = f * K.szego_derivative(x[p], x[r], a, b) / d;
        }
  validate_covariance(M, "covariance_exact");
  return CovarianceBlocks::from_assembled(M, n, m);
}

Eigen::MatrixXcd jet_map(const KernelEvaluator& K, const std::vector<std::vector<cd>>& points) {
  const int m = K.basis().m();
  check_points(points, m);
  const int n = static_cast<int>(points.size());
  const double inv = 1.0 / std::sqrt(static_cast<double>(K.basis().N()));
  Eigen::MatrixXcd J(n * (2 * m + 1), K.basis().dimension());
  for (int p = 0; p < n; ++p) {
    Eigen::MatrixXcd jm = K.jet_matrix({points[p], 0.0});
    for (JetSlot a = 0; a <= 2 * m; ++a)
      J.row(jet_index(n, m, p, a)) = (a == 0 ? 1.0 : inv) * jm.col(a).transpose();
  }
  return J;
}

// ------------------------------------------------------------ limit route

CovarianceBlocks covariance_limit(const std::vector<std::vector<cd>>& z, int m, double c1) {
  check_points(z, m);
  if (!(c1 > 0.0)) throw DomainError("c1(L) must be positive");
  const int n = static_cast<int>(z.size());
  const double k = factorial(m) / std::pow(std::numbers::pi * c1, m);
  CovarianceBlocks b;
  b.n = n;
  b.m = m;
  b.A = Eigen::MatrixXcd::Zero(n, n);
  b.B = Eigen::MatrixXcd::Zero(n, 2 * m * n);
  b.C = Eigen::MatrixXcd::Zero(2 * m * n, 2 * m * n);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r) {
      const cd e = k * std::exp(psi2(z[p], z[r]));
      b.A(p, r) = e;
      for (int q2 = 0; q2 < m; ++q2) {
        const cd diff = z[p][q2] - z[r][q2];
        b.B(p, 2 * m * r + q2) = diff * e;
        for (int q = 0; q < m; ++q)
          b.C(2 * m * p + q, 2 * m * r + q2) =
              ((q == q2 ? 1.0 : 0.0) + std::conj(z[r][q] - z[p][q]) * diff) * e;
      }
    }
  return b;
}

// ----------------------------------------------------------------- reports

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back({M(i, j).real(), M(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json JPDReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json pj = nlohmann::json::array();
    for (auto c : p) pj.push_back({c.real(), c.imag()});
    pts.push_back(pj);
  }
  nlohmann::json j{{"m", m},
                   {"weight", weight},
                   {"N", N},
                   {"dimension", dimension},
                   {"points_scaled", pts},
                   {"exact", matrix_to_json(exact)},
                   {"limit", matrix_to_json(limit)},
                   {"max_dev", max_dev},
                   {"spectral_dev", spectral_dev},
                   {"antiholomorphic_max", antihol_max},
                   {"n_samples", n_samples}};
  if (n_samples > 0) {
    nlohmann::json se = nlohmann::json::array();
    for (Eigen::Index i = 0; i < empirical_se.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < empirical_se.cols(); ++k) row.push_back(empirical_se(i, k));
      se.push_back(row);
    }
    j["ensemble"] = ensemble;
    j["empirical"] = matrix_to_json(empirical);
    j["empirical_se"] = se;
    j["max_zscore"] = max_zscore;
    j["kurtosis"] = kurtosis;
    j["kurtosis_se"] = kurtosis_se;
    j["marginal_histogram"] = marginal_histogram;
  }
  return j;
}

std::string JPDSeries::to_csv() const {
  std::ostringstream os;
  os << "N,max_dev,spectral_dev,n_samples\r\n";
  char buf[128];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%d,%.16e,%.16e,%zu\r\n", r.N, r.max_dev, r.spectral_dev, r.n_samples);
    os << buf;
  }
  return os.str();
}

nlohmann::json JPDSeries::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  return {{"reports", arr}};
}

namespace {

JPDReport exact_report(const KernelEvaluator& K, const std::vector<std::vector<cd>>& z) {
  const int N = K.basis().N();
  const int m = K.basis().m();
  JPDReport r;
  r.m = m;
  r.weight = K.basis().model().weight().text();
  r.N = N;
  r.dimension = K.basis().dimension();
  r.points = z;
  r.exact = covariance_exact(K, scaled_points(z, N)).assembled();
  r.limit = covariance_limit(z, m).assembled();
  Eigen::MatrixXcd D = r.exact - r.limit;
  r.max_dev = D.cwiseAbs().maxCoeff();
  r.spectral_dev = Eigen::JacobiSVD<Eigen::MatrixXcd>(D).singularValues()(0);
  r.antihol_max = CovarianceBlocks::from_assembled(r.exact, static_cast<int>(z.size()), m).antiholomorphic_max();
  return r;
}

}  // namespace

JPDSeries scaling_convergence(int m, const std::string& weight, std::span<const cd> base,
                              const std::vector<std::vector<cd>>& z, const std::vector<int>& Ns,
                              const Parallelism& par) {
  if (Ns.empty()) throw DomainError("N list is empty");
  for (std::size_t i = 1; i < Ns.size(); ++i)
    if (Ns[i] <= Ns[i - 1]) throw DomainError("N list must be strictly increasing");
  check_points(z, m);
  JPDSeries s;
  for (int N : Ns) {
    auto model = ProjectiveModel::make(m, N, weight);
    auto basis = build_basis(model, par);
    auto chart = HeisenbergChart::make(model, base);
    KernelEvaluator K(basis, chart);
    s.reports.push_back(exact_report(K, z));
  }
  return s;
}

std::pair<double, double> jackknife(const Eigen::MatrixXd& block_sums, const Eigen::VectorXd& block_counts,
                                    const std::function<double(const Eigen::VectorXd&)>& stat) {
  const Eigen::Index G = block_sums.rows();
  if (G < 2) throw DomainError("jackknife needs at least two blocks");
  Eigen::VectorXd total = block_sums.colwise().sum().transpose();
  const double n = block_counts.sum();
  const double value = stat(total / n);
  Eigen::VectorXd loo(G);
  for (Eigen::Index g = 0; g < G; ++g)
    loo(g) = stat((total - block_sums.row(g).transpose()) / (n - block_counts(g)));
  const double mean = loo.mean();
  const double se = std::sqrt((G - 1.0) / G * (loo.array() - mean).square().sum());
  return {value, se};
}

JPDReport empirical_jpd(const KernelEvaluator& K, const std::vector<std::vector<cd>>& z, Ensemble ensemble,
                        std::size_t samples, std::uint64_t seed, const Parallelism& par) {
  if (samples < 1000) throw DomainError("empirical JPD needs at least 1000 samples");
  JPDReport r = exact_report(K, z);
  const int N = K.basis().N();
  Eigen::MatrixXcd J = jet_map(K, scaled_points(z, N));
  EnsembleSampler sampler(ensemble, K.basis().dimension(), seed);
  Eigen::MatrixXcd X = sampler.sample_mapped(J, samples, par);  // rows: jets of one section
  const Eigen::Index k = X.cols();
  const Eigen::Index n = X.rows();

  // Jackknife over contiguous blocks.
  const int G = kJackknifeBlocks;
  std::vector<Eigen::MatrixXcd> S(G);
  Eigen::VectorXd counts(G);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(k, k);
  for (int g = 0; g < G; ++g) {
    Eigen::Index lo = n * g / G, hi = n * (g + 1) / G;
    auto Xg = X.middleRows(lo, hi - lo);
    S[g] = Xg.transpose() * Xg.conjugate();
    counts(g) = static_cast<double>(hi - lo);
    total += S[g];
  }
  r.ensemble = to_string(ensemble);
  r.n_samples = samples;
  r.empirical = total / static_cast<double>(n);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(k, k);
  std::vector<Eigen::MatrixXcd> loo(G);
  Eigen::MatrixXcd loo_mean = Eigen::MatrixXcd::Zero(k, k);
  for (int g = 0; g < G; ++g) {
    loo[g] = (total - S[g]) / (static_cast<double>(n) - counts(g));
    loo_mean += loo[g] / static_cast<double>(G);
  }
  for (int g = 0; g < G; ++g) var += (loo[g] - loo_mean).cwiseAbs2();
  r.empirical_se = ((G - 1.0) / G * var).cwiseSqrt();
  r.max_zscore = 0.0;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      if (r.empirical_se(a, b) > 0.0)
        r.max_zscore = std::max(r.max_zscore, std::abs(r.empirical(a, b) - r.exact(a, b)) / r.empirical_se(a, b));

  // Kurtosis of the first value component.
  Eigen::MatrixXd sums(G, 2);
  for (int g = 0; g < G; ++g) {
    Eigen::Index lo = n * g / G, hi = n * (g + 1) / G;
    Eigen::ArrayXd a2 = X.col(0).segment(lo, hi - lo).cwiseAbs2().array();
    sums(g, 0) = a2.sum();
    sums(g, 1) = a2.square().sum();
  }
  auto [kv, kse] = jackknife(sums, counts, [](const Eigen::VectorXd& mu) { return mu(1) / (mu(0) * mu(0)); });
  r.kurtosis = kv;
  r.kurtosis_se = kse;

  const double scale = std::sqrt(r.exact(0, 0).real());
  r.marginal_histogram.assign(20, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = std::abs(X(i, 0)) / scale;
    auto bin = static_cast<std::size_t>(v / 0.2);
    if (bin < 20) r.marginal_histogram[bin] += 1.0 / (static_cast<double>(n) * 0.2);
  }
  return r;
}

}  // namespace szlab
