#include "szlab/global.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "szlab/errors.hpp"

namespace szlab {

namespace {

using std::numbers::pi;

void check_increasing(const std::vector<int>& Ns) {
  if (Ns.empty()) throw DomainError("N list is empty");
  for (std::size_t i = 1; i < Ns.size(); ++i)
    if (Ns[i] <= Ns[i - 1]) throw DomainError("N list must be strictly increasing");
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

double quantile_sorted(const std::vector<double>& x, double q) {
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

// Median standard error from the +-sqrt(n)/2 rank bracket.
double median_se_sorted(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double r = 0.5 * std::sqrt(n);
  auto lo = static_cast<std::ptrdiff_t>(std::floor(0.5 * (n - 1) - r));
  auto hi = static_cast<std::ptrdiff_t>(std::ceil(0.5 * (n - 1) + r));
  lo = std::max<std::ptrdiff_t>(lo, 0);
  hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.size()) - 1);
  return 0.5 * (x[static_cast<std::size_t>(hi)] - x[static_cast<std::size_t>(lo)]);
}

}  // namespace

// ------------------------------------------------------------ Kodaira map

KodairaPoint kodaira_map(const KernelEvaluator& K, const BundlePoint& x) {
  KodairaPoint p;
  p.lift = K.basis().values(K.chart(), x.z, x.theta);
  p.norm2 = p.lift.squaredNorm();
  p.projective = p.lift / std::sqrt(p.norm2);
  return p;
}

// ------------------------------------------------------------ Tian isometry

Eigen::MatrixXcd tian_pullback_metric(const KernelEvaluator& K, std::span<const cd> z) {
  const int m = K.basis().m();
  auto J = K.basis().jets(K.chart(), z, 0.0);
  const double Pi = J.value.squaredNorm();
  Eigen::MatrixXcd G(m, m);
  for (int q = 0; q < m; ++q)
    for (int r = 0; r < m; ++r) {
      cd dd = J.hol.col(r).dot(J.hol.col(q));
      cd dv = J.value.dot(J.hol.col(q));
      cd vd = J.hol.col(r).dot(J.value);
      G(q, r) = (dd / Pi - dv * vd / (Pi * Pi)) / static_cast<double>(K.basis().N());
    }
  return G;
}

double tian_relative_error(const KernelEvaluator& K, std::span<const cd> z) {
  Eigen::MatrixXcd g = K.chart().kahler_metric(z);
  Eigen::MatrixXcd G = tian_pullback_metric(K, z);
  Eigen::LLT<Eigen::MatrixXcd> llt(0.5 * (g + g.adjoint()));
  if (llt.info() != Eigen::Success) throw NumericalError("Kähler metric is not positive definite");
  Eigen::MatrixXcd Linv = llt.matrixL().solve(Eigen::MatrixXcd::Identity(g.rows(), g.cols()));
  Eigen::MatrixXcd D = Linv * (G - g) * Linv.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (D + D.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string TianReport::to_csv() const {
  std::ostringstream os;
  os << "N,statistic,value,stderr\r\n";
  for (std::size_t i = 0; i < N.size(); ++i) {
    os << N[i] << ",tian_sup_relative_error," << csv_number(sup_error[i]) << "," << csv_number(0.0) << "\r\n";
    if (i > 0) os << N[i] << ",ratio_to_previous," << csv_number(ratio[i]) << "," << csv_number(0.0) << "\r\n";
  }
  return os.str();
}

nlohmann::json TianReport::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (double v : ratio) r.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
  return {{"m", m}, {"weight", weight}, {"N", N}, {"sup_error", sup_error}, {"ratio", r}, {"n_points", n_points}};
}

TianReport tian_study(int m, const std::string& weight, std::span<const cd> base,
                      const std::vector<std::vector<cd>>& points, const std::vector<int>& Ns,
                      const Parallelism& par) {
  check_increasing(Ns);
  if (points.empty()) throw DomainError("Tian study needs at least one test point");
  TianReport rep;
  rep.m = m;
  rep.weight = weight;
  rep.N = Ns;
  rep.n_points = points.size();
  for (int N : Ns) {
    auto model = ProjectiveModel::make(m, N, weight);
    auto basis = build_basis(model, par);
    auto chart = HeisenbergChart::make(model, base);
    KernelEvaluator K(basis, chart);
    double worst = 0.0;
    for (const auto& z : points) worst = std::max(worst, tian_relative_error(K, z));
    rep.ratio.push_back(rep.sup_error.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : worst / rep.sup_error.back());
    rep.sup_error.push_back(worst);
  }
  return rep;
}

// ------------------------------------------------------------ Kodaira probe

KodairaProfile kodaira_separation_probe(const KernelEvaluator& K, std::span<const cd> v,
                                        const std::vector<double>& ts) {
  const int m = K.basis().m();
  if (static_cast<int>(v.size()) != m) throw DomainError("probe direction has wrong dimension");
  const int N = K.basis().N();
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  double v2 = 0.0;
  for (auto c : v) v2 += std::norm(c);
  KodairaProfile p;
  p.N = N;
  p.v.assign(v.begin(), v.end());
  BundlePoint o{std::vector<cd>(m, 0.0), 0.0};
  const double P00 = K.szego(o, o).real();
  for (double t : ts) {
    BundlePoint y{std::vector<cd>(v.begin(), v.end()), 0.0};
    for (auto& c : y.z) c *= t * s;
    const double f = std::norm(K.szego(o, y)) / (P00 * K.szego(y, y).real());
    const double g = std::exp(-v2 * t * t);
    p.t.push_back(t);
    p.f.push_back(f);
    p.gaussian.push_back(g);
    p.max_dev = std::max(p.max_dev, std::abs(f - g));
  }
  return p;
}

std::string KodairaProfile::to_csv() const {
  std::ostringstream os;
  os << "t,f,gaussian\r\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << csv_number(t[i]) << "," << csv_number(f[i]) << "," << csv_number(gaussian[i]) << "\r\n";
  return os.str();
}

nlohmann::json KodairaProfile::to_json() const {
  nlohmann::json vj = nlohmann::json::array();
  for (auto c : v) vj.push_back({c.real(), c.imag()});
  return {{"N", N}, {"v", vj}, {"t", t}, {"f", f}, {"gaussian", gaussian}, {"max_dev", max_dev}};
}

// --------------------------------------------------------- sup-norm growth

Eigen::MatrixXcd fs_sphere_grid(double h) {
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  // CP^1 with this metric is a round sphere of radius 1/2; polar angle
  // spacing 2h gives geodesic spacing h.
  const int rings = std::max(2, static_cast<int>(std::ceil(pi / (2.0 * h))));
  std::vector<cd> a, b;
  for (int i = 0; i <= rings; ++i) {
    const double th = pi * i / rings;
    const int k = std::max(1, static_cast<int>(std::ceil(pi * std::sin(th) / h)));
    const double offset = (i % 2) * 0.5;
    for (int j = 0; j < k; ++j) {
      const double ph = 2.0 * pi * (j + offset) / k;
      a.emplace_back(std::cos(0.5 * th), 0.0);
      b.push_back(std::polar(std::sin(0.5 * th), ph));
    }
  }
  Eigen::MatrixXcd G(2, static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    G(0, static_cast<Eigen::Index>(i)) = a[i];
    G(1, static_cast<Eigen::Index>(i)) = b[i];
  }
  return G;
}

PointNorms fs_point_norms(const SectionBasis& basis, const Eigen::VectorXcd& c, std::span<const cd> Z) {
  const int m = basis.m();
  const double N = basis.N();
  auto J = basis.monomial_jet(Z, 2);
  PointNorms out;
  const cd P = J.value.cwiseProduct(c).sum();
  Eigen::VectorXcd g = J.grad.transpose() * c;
  out.value = std::abs(P);
  out.grad = std::sqrt(std::max(0.0, g.squaredNorm() - N * N * std::norm(P)));
  Eigen::MatrixXcd H(m + 1, m + 1);
  for (int k = 0; k <= m; ++k)
    for (int l = 0; l <= m; ++l) H(k, l) = J.hess[k * (m + 1) + l].cwiseProduct(c).sum();
  Eigen::Map<const Eigen::VectorXcd> z(Z.data(), m + 1);
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(m + 1, m + 1) - z * z.adjoint();
  double t = (H.adjoint() * Q.conjugate() * H * Q).trace().real();
  out.hess = std::sqrt(std::max(0.0, t + m * N * N * std::norm(P)));
  return out;
}

Eigen::MatrixXd fs_grid_sup_reference(const SectionBasis& basis, const Eigen::MatrixXcd& grid,
                                      const Eigen::MatrixXcd& coeffs, int max_order) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, coeffs.cols());
  for (Eigen::Index i = 0; i < grid.cols(); ++i) {
    Eigen::VectorXcd Z = grid.col(i);
    for (Eigen::Index s = 0; s < coeffs.cols(); ++s) {
      auto n = fs_point_norms(basis, coeffs.col(s), {Z.data(), static_cast<std::size_t>(Z.size())});
      out(0, s) = std::max(out(0, s), n.value);
      if (max_order >= 1) out(1, s) = std::max(out(1, s), n.grad);
      if (max_order >= 2) out(2, s) = std::max(out(2, s), n.hess);
    }
  }
  return out;
}

Eigen::MatrixXd fs_grid_sup(const SectionBasis& basis, const Eigen::MatrixXcd& grid, const Eigen::MatrixXcd& coeffs,
                            int max_order, const Parallelism& par) {
  if (!basis.identity_coefficients() || basis.m() != 1)
    throw DomainError("grid sup-norms are implemented for the Fubini-Study line only");
  if (coeffs.rows() != static_cast<Eigen::Index>(basis.dimension())) throw DomainError("coefficient length mismatch");
  const Eigen::Index P = grid.cols(), S = coeffs.cols();
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  const double N = basis.N();
  constexpr Eigen::Index kChunk = 256;
  const Eigen::Index chunks = (P + kChunk - 1) / kChunk;
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for num_threads(std::max(1, par.workers)) schedule(dynamic)
  for (Eigen::Index ch = 0; ch < chunks; ++ch) {
    const Eigen::Index lo = ch * kChunk, n = std::min(kChunk, P - lo);
    Eigen::MatrixXcd E(n, d), G0(n, d), G1(n, d), H00, H01, H11;
    if (max_order >= 2) {
      H00.resize(n, d);
      H01.resize(n, d);
      H11.resize(n, d);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXcd Z = grid.col(lo + i);
      auto J = basis.monomial_jet({Z.data(), 2}, max_order >= 2 ? 2 : 1);
      E.row(i) = J.value.transpose();
      G0.row(i) = J.grad.col(0).transpose();
      G1.row(i) = J.grad.col(1).transpose();
      if (max_order >= 2) {
        H00.row(i) = J.hess[0].transpose();
        H01.row(i) = J.hess[1].transpose();
        H11.row(i) = J.hess[3].transpose();
      }
    }
    Eigen::MatrixXcd V = E * coeffs;
    Eigen::MatrixXd mx = Eigen::MatrixXd::Zero(3, S);
    mx.row(0) = V.cwiseAbs().colwise().maxCoeff();
    if (max_order >= 1) {
      Eigen::MatrixXd g2 = (G0 * coeffs).cwiseAbs2() + (G1 * coeffs).cwiseAbs2() - N * N * V.cwiseAbs2();
      mx.row(1) = g2.cwiseMax(0.0).colwise().maxCoeff().cwiseSqrt();
    }
    if (max_order >= 2) {
      Eigen::MatrixXcd A00 = H00 * coeffs, A01 = H01 * coeffs, A11 = H11 * coeffs;
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Vector2cd z = grid.col(lo + i);
        Eigen::Matrix2cd Q = Eigen::Matrix2cd::Identity() - z * z.adjoint();
        for (Eigen::Index s = 0; s < S; ++s) {
          Eigen::Matrix2cd H;
          H << A00(i, s), A01(i, s), A01(i, s), A11(i, s);
          double t = (H.adjoint() * Q.conjugate() * H * Q).trace().real() + N * N * std::norm(V(i, s));
          mx(2, s) = std::max(mx(2, s), std::sqrt(std::max(0.0, t)));
        }
      }
    }
    partial[static_cast<std::size_t>(ch)] = mx;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, S);
  for (const auto& mx : partial) out = out.cwiseMax(mx);
  return out;
}

double NormGrowthReport::spread(int order) const {
  const auto& r = median_ratio.at(static_cast<std::size_t>(order));
  return *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
}

std::string NormGrowthReport::to_csv() const {
  static const char* names[] = {"median_sup_s_over_sqrt_logN", "median_sup_grad_over_sqrt_NlogN",
                                "median_sup_hess_over_N_sqrt_logN"};
  std::ostringstream os;
  os << "N,statistic,value,stderr\r\n";
  for (std::size_t i = 0; i < N.size(); ++i)
    for (int k = 0; k <= max_order; ++k)
      os << N[i] << "," << names[k] << "," << csv_number(median_ratio[k][i]) << ","
         << csv_number(median_ratio_se[k][i]) << "\r\n";
  return os.str();
}

nlohmann::json NormGrowthReport::to_json() const {
  nlohmann::json q = nlohmann::json::array();
  for (int k = 0; k <= max_order; ++k) q.push_back(quantiles[k]);
  nlohmann::json mr = nlohmann::json::array(), ms = nlohmann::json::array();
  for (int k = 0; k <= max_order; ++k) {
    mr.push_back(median_ratio[k]);
    ms.push_back(median_ratio_se[k]);
  }
  std::vector<int> ok(refinement_ok.begin(), refinement_ok.end());
  return {{"N", N},
          {"samples", samples},
          {"max_order", max_order},
          {"grid_constant", grid_constant},
          {"grid_points", grid_points},
          {"refinement_change", refinement_change},
          {"refinement_ok", ok},
          {"warnings", warnings},
          {"quantile_levels", kQuantileLevels},
          {"quantiles", q},
          {"median_ratio", mr},
          {"median_ratio_se", ms},
          {"min_sup_squared", min_sup_squared}};
}

NormGrowthReport supnorm_statistics(const std::vector<int>& Ns, Ensemble ensemble, std::size_t samples,
                                    std::uint64_t seed, int max_order, const Parallelism& par,
                                    double grid_constant) {
  check_increasing(Ns);
  if (Ns.front() < 2) throw DomainError("sup-norm statistics need N >= 2 (log N > 0)");
  if (max_order < 0 || max_order > 2) throw DomainError("derivative order must be 0, 1 or 2");
  if (samples < 2) throw DomainError("need at least two samples");
  NormGrowthReport rep;
  rep.N = Ns;
  rep.samples = samples;
  rep.max_order = max_order;
  rep.grid_constant = grid_constant;
  rep.quantiles.assign(3, {});
  rep.median_ratio.assign(3, {});
  rep.median_ratio_se.assign(3, {});
  for (int N : Ns) {
    auto model = ProjectiveModel::make(1, N);
    auto basis = build_basis(model, par);
    const double h = grid_constant / std::sqrt(static_cast<double>(N));
    Eigen::MatrixXcd grid = fs_sphere_grid(h);
    if (static_cast<double>(grid.cols()) * static_cast<double>(basis.dimension()) > 1e9)
      throw ResourceCapError("sup-norm grid too large");
    EnsembleSampler sampler(ensemble, basis.dimension(), derive_seed(seed, static_cast<std::uint64_t>(N)));
    Eigen::MatrixXcd coeffs = sampler.sample(samples, par).transpose();
    Eigen::MatrixXd sup = fs_grid_sup(basis, grid, coeffs, max_order, par);

    const Eigen::Index nv = std::min<Eigen::Index>(5, static_cast<Eigen::Index>(samples));
    Eigen::MatrixXd fine = fs_grid_sup(basis, fs_sphere_grid(0.5 * h), coeffs.leftCols(nv), max_order, par);
    double change = 0.0;
    for (int k = 0; k <= max_order; ++k)
      for (Eigen::Index s = 0; s < nv; ++s) change = std::max(change, std::abs(fine(k, s) - sup(k, s)) / fine(k, s));
    rep.grid_points.push_back(static_cast<std::size_t>(grid.cols()));
    rep.refinement_change.push_back(change);
    rep.refinement_ok.push_back(change < 0.02);
    if (change >= 0.02)
      rep.warnings.push_back("N=" + std::to_string(N) + ": halving the grid spacing changed the sup by " +
                             std::to_string(100 * change) + "%");

    const double logN = std::log(static_cast<double>(N));
    const double norm[3] = {std::sqrt(logN), std::sqrt(N * logN), N * std::sqrt(logN)};
    for (int k = 0; k <= max_order; ++k) {
      std::vector<double> x(static_cast<std::size_t>(sup.cols()));
      for (Eigen::Index s = 0; s < sup.cols(); ++s) x[static_cast<std::size_t>(s)] = sup(k, s);
      std::sort(x.begin(), x.end());
      std::vector<double> q;
      for (double lv : kQuantileLevels) q.push_back(quantile_sorted(x, lv));
      rep.quantiles[k].push_back(q);
      rep.median_ratio[k].push_back(quantile_sorted(x, 0.5) / norm[k]);
      rep.median_ratio_se[k].push_back(median_se_sorted(x) / norm[k]);
    }
    rep.min_sup_squared.push_back(sup.row(0).minCoeff() * sup.row(0).minCoeff());
  }
  return rep;
}

TailCalibration tail_calibration(const KernelEvaluator& K, std::span<const cd> z0, double lambda,
                                 std::size_t samples, std::uint64_t seed, const Parallelism& par) {
  const auto d = K.basis().dimension();
  Eigen::VectorXcd v = K.basis().values(K.chart(), z0, 0.0);
  EnsembleSampler sampler(Ensemble::sphere, d, seed);
  Eigen::MatrixXcd s = sampler.sample_mapped(v.transpose(), samples, par);
  const double thr = lambda * v.norm();
  TailCalibration t;
  t.lambda = lambda;
  t.frequency = static_cast<double>((s.cwiseAbs().array() > thr).count()) / static_cast<double>(samples);
  t.expected = sphere_tail_prob(lambda, static_cast<int>(d));
  t.sigma = std::sqrt(t.expected * (1.0 - t.expected) / static_cast<double>(samples));
  t.pass = std::abs(t.frequency - t.expected) <= 4.0 * t.sigma;
  return t;
}

nlohmann::json FrameNormBounds::to_json() const {
  return {{"N", N},
          {"sup_value2", sup_value2},
          {"sup_hol2", sup_hol2},
          {"sup_antihol2", sup_antihol2},
          {"hol_ratio", hol_ratio}};
}

FrameNormBounds frame_norm_bounds(int m, const std::string& weight, std::span<const cd> base,
                                  const std::vector<int>& Ns, double radius, const Parallelism& par) {
  check_increasing(Ns);
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  // Lattice of step radius/4 in every real coordinate, clipped to the ball.
  std::vector<std::vector<cd>> pts;
  const int k = 4;
  std::vector<double> ax;
  for (int i = -k; i <= k; ++i) ax.push_back(radius * i / k);
  if (m == 1) {
    for (double x : ax)
      for (double y : ax)
        if (x * x + y * y <= radius * radius + 1e-12) pts.push_back({cd(x, y)});
  } else {
    for (double x1 : ax)
      for (double y1 : ax)
        for (double x2 : ax)
          for (double y2 : ax)
            if (x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2 <= radius * radius + 1e-12)
              pts.push_back({cd(x1, y1), cd(x2, y2)});
  }
  FrameNormBounds out;
  out.N = Ns;
  for (int N : Ns) {
    auto model = ProjectiveModel::make(m, N, weight);
    auto basis = build_basis(model, par);
    auto chart = HeisenbergChart::make(model, base);
    double sv = 0.0, sh = 0.0, sa = 0.0;
    for (const auto& z : pts) {
      auto J = basis.jets(chart, z, 0.0);
      sv = std::max(sv, J.value.squaredNorm());
      sh = std::max(sh, J.hol.squaredNorm());
      sa = std::max(sa, J.antihol.squaredNorm());
    }
    out.sup_value2.push_back(sv);
    out.sup_hol2.push_back(sh);
    out.sup_antihol2.push_back(sa);
    out.hol_ratio.push_back(sh / std::pow(static_cast<double>(N), m + 1));
  }
  return out;
}

}  // namespace szlab
