#include "szlab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "szlab/errors.hpp"

namespace szlab {

void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("Gauss-Legendre needs at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (1.0 - x);
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = weights[n - 1 - i] = 0.5 * w;
  }
}

Eigen::VectorXcd QuadratureGrid::affine(std::size_t i) const {
  Eigen::VectorXcd Z = nodes.col(static_cast<Eigen::Index>(i));
  return Z.tail(m) / Z(0);
}

double QuadratureGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

QuadratureGrid product_grid(int m, int bound, int n_t, int n_angle) {
  std::size_t count = 1;
  for (int j = 0; j < m; ++j) count *= static_cast<std::size_t>(n_t) * n_angle;
  if (count > kMaxQuadratureNodes)
    throw ResourceCapError("quadrature grid of " + std::to_string(count) + " nodes exceeds the cap " +
                           std::to_string(kMaxQuadratureNodes));
  std::vector<double> s, ws;
  gauss_legendre01(n_t, s, ws);
  std::vector<cd> phase(n_angle);
  for (int k = 0; k < n_angle; ++k) phase[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / n_angle);

  QuadratureGrid g;
  g.m = m;
  g.bound = bound;
  g.nodes.resize(m + 1, static_cast<Eigen::Index>(count));
  g.weights.resize(count);
  const double vol = std::pow(std::numbers::pi, m);
  const double angle_w = 1.0 / n_angle;
  std::size_t idx = 0;
  if (m == 1) {
    for (int i = 0; i < n_t; ++i)
      for (int a = 0; a < n_angle; ++a, ++idx) {
        double t = s[i];
        g.nodes(0, idx) = std::sqrt(1.0 - t);
        g.nodes(1, idx) = std::sqrt(t) * phase[a];
        g.weights[idx] = vol * ws[i] * angle_w;
      }
  } else {
    for (int i = 0; i < n_t; ++i)
      for (int j = 0; j < n_t; ++j) {
        double t1 = s[i], t2 = (1.0 - s[i]) * s[j];
        double t0 = std::max(0.0, 1.0 - t1 - t2);
        double w = vol * ws[i] * ws[j] * (1.0 - s[i]) * angle_w * angle_w;
        for (int a = 0; a < n_angle; ++a)
          for (int b = 0; b < n_angle; ++b, ++idx) {
            g.nodes(0, idx) = std::sqrt(t0);
            g.nodes(1, idx) = std::sqrt(t1) * phase[a];
            g.nodes(2, idx) = std::sqrt(t2) * phase[b];
            g.weights[idx] = w;
          }
      }
  }
  return g;
}

}  // namespace

QuadratureGrid build_quadrature(int m, int bound) {
  if (m < 1 || m > 2) throw DomainError("quadrature supports m = 1, 2");
  if (bound < 0) throw DomainError("exactness bound must be non-negative");
  int n = bound / 2 + 1;
  return product_grid(m, bound, n + (m == 2 ? 1 : 0), n + 1);
}

QuadratureGrid build_quadrature(const ProjectiveModel& model, int bound) {
  const int N = model.N();
  if (bound < 2 * N + 4) throw DomainError("exactness bound must be at least 2N + 4");
  if (model.unperturbed()) return build_quadrature(model.m(), bound);
  int extra = static_cast<int>(std::ceil(2.0 * N * model.weight_amplitude())) + (model.m() == 1 ? 40 : 10);
  int n = bound / 2 + 1 + extra;
  QuadratureGrid g = product_grid(model.m(), bound, n, n + 1);
  std::vector<cd> w(model.m());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Eigen::VectorXcd a = g.affine(i);
    for (int j = 0; j < model.m(); ++j) w[j] = a(j);
    g.weights[i] *= model.volume_density_ratio(w);
  }
  double total = g.total_weight();
  if (std::abs(total - model.volume()) > 1e-9 * model.volume())
    throw NumericalError("perturbed quadrature misses the model volume: " + std::to_string(total));
  return g;
}

}  // namespace szlab
