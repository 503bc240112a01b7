#include "szlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "szlab/errors.hpp"

namespace szlab {

KernelEvaluator::KernelEvaluator(const SectionBasis& basis, const HeisenbergChart& chart)
    : basis_(&basis), chart_(&chart) {
  if (basis.m() != chart.m() || basis.N() != chart.model().N())
    throw DomainError("basis and chart belong to different models");
}

Eigen::MatrixXcd KernelEvaluator::jet_matrix(const BundlePoint& x) const {
  const int m = basis_->m();
  SectionBasis::Jets J = basis_->jets(*chart_, x.z, x.theta);
  Eigen::MatrixXcd out(basis_->dimension(), 2 * m + 1);
  out.col(0) = J.value;
  out.middleCols(1, m) = J.hol;
  out.middleCols(1 + m, m) = J.antihol;
  return out;
}

cd KernelEvaluator::szego(const BundlePoint& x, const BundlePoint& y) const {
  Eigen::VectorXcd a = basis_->values(*chart_, x.z, x.theta);
  Eigen::VectorXcd b = basis_->values(*chart_, y.z, y.theta);
  return b.dot(a);  // sum_j a_j conj(b_j)
}

cd KernelEvaluator::szego_derivative(const BundlePoint& x, const BundlePoint& y, JetSlot slot_x,
                                     JetSlot slot_y) const {
  const int m = basis_->m();
  if (slot_x < 0 || slot_x > 2 * m || slot_y < 0 || slot_y > 2 * m)
    throw DomainError("jet slot out of range");
  Eigen::MatrixXcd a = jet_matrix(x);
  Eigen::MatrixXcd b = jet_matrix(y);
  return b.col(slot_y).dot(a.col(slot_x));
}

cd psi2(std::span<const cd> u, std::span<const cd> v) {
  if (u.size() != v.size()) throw DomainError("psi2: dimension mismatch");
  cd s = 0.0;
  double nu = 0.0, nv = 0.0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    s += u[q] * std::conj(v[q]);
    nu += std::norm(u[q]);
    nv += std::norm(v[q]);
  }
  return s - 0.5 * (nu + nv);
}

cd heisenberg_kernel(std::span<const cd> u, double theta, std::span<const cd> v, double phi) {
  const double m = static_cast<double>(u.size());
  return std::exp(cd(0.0, theta - phi) + psi2(u, v)) / std::pow(std::numbers::pi, m);
}

namespace {

std::vector<cd> dilate(std::span<const cd> u, double s) {
  std::vector<cd> z(u.begin(), u.end());
  for (auto& c : z) c *= s;
  return z;
}

}  // namespace

cd scaled_kernel(const KernelEvaluator& K, std::span<const cd> u, double theta, std::span<const cd> v,
                 double phi) {
  const int N = K.basis().N();
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  BundlePoint x{dilate(u, s), theta / N};
  BundlePoint y{dilate(v, s), phi / N};
  return K.szego(x, y) / std::pow(static_cast<double>(N), K.basis().m());
}

ScalingGrid ScalingGrid::defaults(int m) {
  ScalingGrid g;
  if (m == 2) g.step = 0.5;
  return g;
}

std::vector<std::vector<cd>> ScalingGrid::points(int m) const {
  if (!(step > 0.0) || !(radius >= 0.0)) throw DomainError("scaling grid needs step > 0, radius >= 0");
  const int k = static_cast<int>(std::floor(radius / step + 1e-9));
  std::vector<double> axis;
  for (int i = -k; i <= k; ++i) axis.push_back(i * step);
  const double r2 = radius * radius * (1.0 + 1e-12);
  std::vector<std::vector<cd>> pts;
  if (m == 1) {
    for (double a : axis)
      for (double b : axis)
        if (a * a + b * b <= r2) pts.push_back({cd(a, b)});
  } else {
    for (double a : axis)
      for (double b : axis)
        for (double c : axis)
          for (double d : axis)
            if (a * a + b * b + c * c + d * d <= r2) pts.push_back({cd(a, b), cd(c, d)});
  }
  return pts;
}

double scaling_sup_error(const KernelEvaluator& K, const ScalingGrid& grid, const Parallelism& par,
                         Eigen::MatrixXd* pair_errors) {
  const int m = K.basis().m();
  const int N = K.basis().N();
  const auto pts = grid.points(m);
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  const Eigen::Index d = static_cast<Eigen::Index>(K.basis().dimension());
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  const double norm = 1.0 / std::pow(static_cast<double>(N), m);

  Eigen::MatrixXcd E(n, d);
#pragma omp parallel for num_threads(par.workers) schedule(static)
  for (Eigen::Index a = 0; a < n; ++a) {
    std::vector<cd> z = dilate(pts[a], s);
    E.row(a) = K.basis().values(K.chart(), z, 0.0).transpose();
  }
  // G(a, b) = sum_j S_j(u_a) conj(S_j(u_b)), assembled by column blocks.
  Eigen::MatrixXcd G(n, n);
  constexpr Eigen::Index kBlock = 64;
  const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
  Eigen::MatrixXcd Eh = E.adjoint();
#pragma omp parallel for num_threads(par.workers) schedule(dynamic)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index c0 = b * kBlock, cols = std::min(kBlock, n - c0);
    G.middleCols(c0, cols).noalias() = E * Eh.middleCols(c0, cols);
  }

  std::vector<double> row_max(n, 0.0);
  if (pair_errors) pair_errors->resize(n, n);
#pragma omp parallel for num_threads(par.workers) schedule(static)
  for (Eigen::Index a = 0; a < n; ++a) {
    double rm = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      double e = 0.0;
      for (double th : grid.angles)
        for (double ph : grid.angles) {
          cd scaled = norm * G(a, b) * std::polar(1.0, th - ph);
          e = std::max(e, std::abs(scaled - heisenberg_kernel(pts[a], th, pts[b], ph)));
        }
      if (pair_errors) (*pair_errors)(a, b) = e;
      rm = std::max(rm, e);
    }
    row_max[a] = rm;
  }
  return *std::max_element(row_max.begin(), row_max.end());
}

double scaling_sup_error_reference(const KernelEvaluator& K, const ScalingGrid& grid) {
  const auto pts = grid.points(K.basis().m());
  double sup = 0.0;
  for (const auto& u : pts)
    for (const auto& v : pts)
      for (double th : grid.angles)
        for (double ph : grid.angles)
          sup = std::max(sup, std::abs(scaled_kernel(K, u, th, v, ph) - heisenberg_kernel(u, th, v, ph)));
  return sup;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs at least two points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

void check_increasing(const std::vector<int>& Ns) {
  if (Ns.empty()) throw DomainError("N list is empty");
  for (std::size_t i = 1; i < Ns.size(); ++i)
    if (Ns[i] <= Ns[i - 1]) throw DomainError("N list must be strictly increasing");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace

ScalingReport scaling_study(int m, const std::string& weight, std::span<const cd> base,
                            const ScalingGrid& grid, const std::vector<int>& Ns, const Parallelism& par) {
  check_increasing(Ns);
  ScalingReport r;
  r.m = m;
  r.weight = weight;
  r.grid = grid;
  r.grid_points = grid.points(m).size();
  for (int N : Ns) {
    ProjectiveModel model = ProjectiveModel::make(m, N, weight);
    SectionBasis basis = build_basis(model, par);
    HeisenbergChart chart = HeisenbergChart::make(model, base);
    KernelEvaluator K(basis, chart);
    Eigen::MatrixXd pe;
    double e = scaling_sup_error(K, grid, par, &pe);
    r.N.push_back(N);
    r.sup_error.push_back(e);
    r.remainder_constant.push_back(e * std::sqrt(static_cast<double>(N)));
    r.pair_errors.push_back(std::move(pe));
    std::vector<double> xs(r.N.begin(), r.N.end());
    r.slope_running.push_back(xs.size() < 2 ? std::numeric_limits<double>::quiet_NaN()
                                            : loglog_slope(xs, r.sup_error));
  }
  r.slope = r.slope_running.back();
  return r;
}

std::string ScalingReport::to_csv() const {
  std::ostringstream os;
  os << "N,sup_error,slope_running,remainder_constant\r\n";
  for (std::size_t i = 0; i < N.size(); ++i)
    os << N[i] << ',' << fmt(sup_error[i]) << ',' << fmt(slope_running[i]) << ','
       << fmt(remainder_constant[i]) << "\r\n";
  return os.str();
}

nlohmann::json ScalingReport::to_json(bool include_grid) const {
  nlohmann::json j;
  j["m"] = m;
  j["weight"] = weight;
  j["N"] = N;
  j["sup_error"] = sup_error;
  nlohmann::json sr = nlohmann::json::array();
  for (double s : slope_running) sr.push_back(std::isnan(s) ? nlohmann::json(nullptr) : nlohmann::json(s));
  j["slope_running"] = sr;
  j["remainder_constant"] = remainder_constant;
  j["slope"] = slope;
  j["grid"] = {{"radius", grid.radius}, {"step", grid.step}, {"angles", grid.angles}, {"points", grid_points}};
  if (include_grid) {
    auto pts = grid.points(m);
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : pts) {
      nlohmann::json c = nlohmann::json::array();
      for (auto v : p) c.push_back({v.real(), v.imag()});
      coords.push_back(c);
    }
    j["grid_points"] = coords;
    nlohmann::json errs = nlohmann::json::array();
    for (const auto& M : pair_errors) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index a = 0; a < M.rows(); ++a) {
        std::vector<double> row(M.cols());
        for (Eigen::Index b = 0; b < M.cols(); ++b) row[b] = M(a, b);
        rows.push_back(row);
      }
      errs.push_back(rows);
    }
    j["pair_errors"] = errs;
  }
  return j;
}

double diagonal_density(const SectionBasis& basis, std::span<const cd> Z) {
  HeisenbergChart chart = HeisenbergChart::make(basis.model(), Z);
  std::vector<cd> zero(basis.m(), 0.0);
  return basis.values(chart, zero, 0.0).squaredNorm();
}

DensityFit density_expansion_fit(const std::vector<int>& Ns, const std::vector<double>& density, int m) {
  if (Ns.size() != density.size()) throw DomainError("density fit: size mismatch");
  std::vector<int> sorted(Ns);
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 3)
    throw DomainError("density fit needs at least three distinct N");
  const Eigen::Index n = static_cast<Eigen::Index>(Ns.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double N = Ns[i];
    X(i, 0) = std::pow(N, m);
    X(i, 1) = std::pow(N, m - 1);
    X(i, 2) = std::pow(N, m - 2);
    y(i) = density[i];
  }
  Eigen::Vector3d scale;
  for (int k = 0; k < 3; ++k) scale(k) = X.col(k).cwiseAbs().maxCoeff();
  Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs);
  const auto& sv = svd.singularValues();
  DensityFit f;
  f.condition = sv(0) / sv(2);
  if (!(f.condition < 1e12)) throw NumericalError("density fit is ill-conditioned; widen the N range");
  Eigen::Vector3d c = Xs.colPivHouseholderQr().solve(y);
  c = c.cwiseQuotient(scale);
  f.a0 = c(0);
  f.a1 = c(1);
  f.a2 = c(2);
  Eigen::VectorXd fit = X * c;
  for (Eigen::Index i = 0; i < n; ++i) f.residual = std::max(f.residual, std::abs(fit(i) - y(i)) / std::abs(y(i)));
  f.N = Ns;
  f.density = density;
  return f;
}

DensityFit density_expansion_fit(int m, const std::string& weight, std::span<const cd> Z,
                                 const std::vector<int>& Ns, const Parallelism& par) {
  std::vector<double> dens;
  for (int N : Ns) {
    ProjectiveModel model = ProjectiveModel::make(m, N, weight);
    SectionBasis basis = build_basis(model, par);
    dens.push_back(diagonal_density(basis, Z));
  }
  return density_expansion_fit(Ns, dens, m);
}

}  // namespace szlab
