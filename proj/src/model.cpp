#include "szlab/model.hpp"

#include <cmath>
#include <numbers>

#include "szlab/errors.hpp"

namespace szlab {

std::size_t section_dimension(int m, int N) {
  if (m < 1 || N < 0) throw DomainError("section_dimension: need m >= 1, N >= 0");
  // Monomials w^alpha with |alpha| <= N in m variables, counted by stars-and-bars
  // recursion over the last exponent.
  std::vector<std::size_t> count(N + 1, 1);  // m = 0: one monomial per budget
  for (int k = 1; k <= m; ++k) {
    std::vector<std::size_t> next(N + 1, 0);
    for (int budget = 0; budget <= N; ++budget)
      for (int e = 0; e <= budget; ++e) next[budget] += count[budget - e];
    count = std::move(next);
  }
  return count[N];
}

Eigen::MatrixXcd fubini_study_metric(std::span<const cd> w) {
  const int m = static_cast<int>(w.size());
  double s = 1.0;
  for (auto c : w) s += std::norm(c);
  Eigen::MatrixXcd g(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      g(j, k) = ((j == k ? s : 0.0) - std::conj(w[j]) * w[k]) / (s * s);
  return g;
}

namespace {

Eigen::MatrixXcd weight_ddbar(const WeightExpr& phi, std::span<const cd> w) {
  const int m = static_cast<int>(w.size());
  std::vector<CJet> jw(m);
  for (int j = 0; j < m; ++j)
    jw[j] = CJet(Jet2::variable(w[j].real(), 2 * j), Jet2::variable(w[j].imag(), 2 * j + 1));
  Jet2 f = phi.jet(jw);
  Eigen::MatrixXcd h(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) h(j, k) = wirtinger_dz_dzbar(f, j, k);
  return h;
}

std::vector<std::vector<cd>> sample_directions(int m) {
  std::vector<std::vector<cd>> dirs;
  if (m == 1) {
    for (int k = 0; k < 8; ++k) dirs.push_back({std::polar(1.0, k * std::numbers::pi / 4.0)});
  } else {
    const double r = 1.0 / std::sqrt(2.0);
    const cd i(0.0, 1.0);
    dirs = {{1.0, 0.0}, {0.0, 1.0}, {r, r}, {r, -r}, {r, i * r}, {0.6, 0.8 * i}, {0.8, -0.6}};
  }
  return dirs;
}

}  // namespace

ProjectiveModel ProjectiveModel::make(int m, int N, std::string_view weight_text) {
  if (m < 1 || m > 2) throw DomainError("supported complex dimensions are m = 1, 2");
  if (N < 1) throw DomainError("bundle power N must be >= 1");
  if (section_dimension(m, N) > kMaxSectionDimension)
    throw ResourceCapError("d_N = " + std::to_string(section_dimension(m, N)) +
                           " exceeds the cap " + std::to_string(kMaxSectionDimension));
  WeightExpr phi = WeightExpr::parse(weight_text, m);
  double amp = 0.0;
  if (!phi.is_zero()) {
    constexpr double kBound = 50.0;
    const double radii[] = {0.0, 0.05, 0.2, 0.5, 0.8, 1.0, 1.5, 2.5, 5.0, 10.0, 100.0, 1e3, 1e4, 1e6};
    for (const auto& dir : sample_directions(m)) {
      for (double R : radii) {
        for (double turn : {0.0, 1.1, 2.3}) {
          std::vector<cd> w(m);
          for (int j = 0; j < m; ++j) w[j] = R * dir[j] * std::polar(1.0, turn);
          double v = phi.value(w);
          if (!std::isfinite(v) || std::abs(v) > kBound)
            throw DomainError("weight '" + std::string(weight_text) + "' is unbounded on the chart");
          amp = std::max(amp, std::abs(v));
          if (R <= 100.0) {
            Eigen::MatrixXcd g = fubini_study_metric(w) + weight_ddbar(phi, w);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
            if (es.eigenvalues().minCoeff() <= 0.0)
              throw DomainError("weight '" + std::string(weight_text) +
                                "' makes the curvature form non-positive");
          }
        }
      }
    }
    // The limit toward the hyperplane at infinity must exist and depend only on
    // the projective direction (for m = 1, on nothing at all).
    std::vector<double> far_values;
    for (const auto& dir : sample_directions(m)) {
      std::vector<cd> a(m), b(m), c(m);
      for (int j = 0; j < m; ++j) {
        a[j] = 1e5 * dir[j];
        b[j] = 1e7 * dir[j];
        c[j] = 1e7 * dir[j] * std::polar(1.0, 0.7);
      }
      double va = phi.value(a), vb = phi.value(b), vc = phi.value(c);
      if (std::abs(va - vb) > 1e-3 * (1.0 + std::abs(vb)) || std::abs(vb - vc) > 1e-3 * (1.0 + std::abs(vb)))
        throw DomainError("weight '" + std::string(weight_text) +
                          "' does not extend continuously to the hyperplane at infinity");
      far_values.push_back(vb);
    }
    if (m == 1)
      for (double v : far_values)
        if (std::abs(v - far_values.front()) > 1e-3 * (1.0 + std::abs(v)))
          throw DomainError("weight '" + std::string(weight_text) +
                            "' does not extend continuously to the point at infinity");
  }
  return ProjectiveModel(m, N, std::move(phi), amp);
}

ProjectiveModel ProjectiveModel::with_power(int N) const {
  if (N < 1) throw DomainError("bundle power N must be >= 1");
  if (section_dimension(m_, N) > kMaxSectionDimension)
    throw ResourceCapError("d_N = " + std::to_string(section_dimension(m_, N)) +
                           " exceeds the cap " + std::to_string(kMaxSectionDimension));
  return ProjectiveModel(m_, N, weight_, weight_amplitude_);
}

double ProjectiveModel::volume() const {
  return m_ == 1 ? std::numbers::pi : std::numbers::pi * std::numbers::pi / 2.0;
}

double ProjectiveModel::volume_density_ratio(std::span<const cd> w) const {
  if (unperturbed()) return 1.0;
  Eigen::MatrixXcd g = fubini_study_metric(w);
  Eigen::MatrixXcd gp = g + weight_ddbar(weight_, w);
  return gp.determinant().real() / g.determinant().real();
}

}  // namespace szlab
