#include "szlab/section_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

#include "szlab/errors.hpp"

namespace szlab {

std::vector<std::array<int, 3>> monomial_exponents(int m, int N) {
  std::vector<std::array<int, 3>> out;
  if (m == 1) {
    for (int j = 0; j <= N; ++j) out.push_back({N - j, j, 0});
  } else if (m == 2) {
    for (int a = 0; a <= N; ++a)
      for (int b = 0; a + b <= N; ++b) out.push_back({N - a - b, a, b});
  } else {
    throw DomainError("monomial_exponents supports m = 1, 2");
  }
  return out;
}

namespace {

std::vector<double> log_sqrt_norm_constants(int m, int N, const std::vector<std::array<int, 3>>& exps) {
  std::vector<double> out(exps.size());
  const double base = std::lgamma(N + m + 1.0) - m * std::log(std::numbers::pi);
  for (std::size_t j = 0; j < exps.size(); ++j) {
    double s = base;
    for (int k = 0; k <= m; ++k) s -= std::lgamma(exps[j][k] + 1.0);
    out[j] = 0.5 * s;
  }
  return out;
}

/// Polar data of one homogeneous point, used to evaluate Z^alpha by logs.
struct PolarPoint {
  int m;
  std::array<double, 3> log_abs{};
  std::array<double, 3> arg{};
  std::array<bool, 3> zero{};

  PolarPoint(std::span<const cd> Z, int mm) : m(mm) {
    for (int k = 0; k <= m; ++k) {
      double a = std::abs(Z[k]);
      zero[k] = a == 0.0;
      log_abs[k] = zero[k] ? 0.0 : std::log(a);
      arg[k] = zero[k] ? 0.0 : std::arg(Z[k]);
    }
  }

  /// exp(lc) * Z^e with e possibly containing negative entries (-> 0).
  cd power(double lc, const std::array<int, 3>& e) const {
    double lm = lc, ph = 0.0;
    for (int k = 0; k <= m; ++k) {
      if (e[k] < 0) return 0.0;
      if (e[k] == 0) continue;
      if (zero[k]) return 0.0;
      lm += e[k] * log_abs[k];
      ph += e[k] * arg[k];
    }
    return std::polar(std::exp(lm), ph);
  }
};

Eigen::VectorXcd unit_vector(std::span<const cd> Z) {
  Eigen::VectorXcd v(Z.size());
  for (std::size_t k = 0; k < Z.size(); ++k) v(k) = Z[k];
  double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("homogeneous point must be a nonzero vector");
  return v / n;
}

void fill_values(const PolarPoint& P, const std::vector<std::array<int, 3>>& exps,
                 const std::vector<double>& lsk, cd scale, cd* out) {
  for (std::size_t j = 0; j < exps.size(); ++j) out[j] = scale * P.power(lsk[j], exps[j]);
}

/// e^{-N phi} at a unit homogeneous node, or 1 for the Fubini-Study model.
double weight_factor(const ProjectiveModel& model, const Eigen::VectorXcd& Z) {
  if (model.unperturbed()) return 1.0;
  std::vector<cd> w(model.m());
  for (int j = 0; j < model.m(); ++j) w[j] = Z(j + 1) / Z(0);
  return std::exp(-model.N() * model.phi(w));
}

}  // namespace

double SectionBasis::monomial_norm2(std::size_t j) const {
  // ||w^alpha||^2 = 1 / K_alpha.
  return std::exp(-2.0 * log_sqrt_K_.at(j));
}

Eigen::VectorXcd SectionBasis::monomial_values(std::span<const cd> Z) const {
  Eigen::VectorXcd u = unit_vector(Z);
  PolarPoint P({u.data(), static_cast<std::size_t>(u.size())}, m());
  Eigen::VectorXcd out(dimension());
  fill_values(P, exps_, log_sqrt_K_, 1.0, out.data());
  return out;
}

MonomialJet SectionBasis::monomial_jet(std::span<const cd> Z, int order) const {
  const int mm = m();
  const std::size_t d = dimension();
  PolarPoint P(Z, mm);
  MonomialJet J;
  J.value.resize(d);
  fill_values(P, exps_, log_sqrt_K_, 1.0, J.value.data());
  if (order >= 1) {
    J.grad.resize(d, mm + 1);
    for (std::size_t j = 0; j < d; ++j)
      for (int k = 0; k <= mm; ++k) {
        auto e = exps_[j];
        int a = e[k];
        e[k] -= 1;
        J.grad(j, k) = a == 0 ? cd(0.0) : double(a) * P.power(log_sqrt_K_[j], e);
      }
  }
  if (order >= 2) {
    J.hess.assign((mm + 1) * (mm + 1), Eigen::VectorXcd(d));
    for (int k = 0; k <= mm; ++k)
      for (int l = 0; l <= mm; ++l) {
        Eigen::VectorXcd& h = J.hess[k * (mm + 1) + l];
        for (std::size_t j = 0; j < d; ++j) {
          auto e = exps_[j];
          double c = e[k];
          e[k] -= 1;
          c *= e[l];
          e[l] -= 1;
          h(j) = c == 0.0 ? cd(0.0) : c * P.power(log_sqrt_K_[j], e);
        }
      }
  }
  return J;
}

Eigen::VectorXcd SectionBasis::to_basis(const Eigen::VectorXcd& v) const {
  if (identity_) return v;
  return C_.transpose() * v;
}

Eigen::MatrixXcd SectionBasis::to_basis(const Eigen::MatrixXcd& v) const {
  if (identity_) return v;
  return C_.transpose() * v;
}

Eigen::VectorXcd SectionBasis::values(const HeisenbergChart& chart, std::span<const cd> z,
                                      double theta) const {
  ChartPoint p = chart.at(z);
  Eigen::VectorXcd u = p.Z / p.norm_Z;
  PolarPoint P({u.data(), static_cast<std::size_t>(u.size())}, m());
  Eigen::VectorXcd e(dimension());
  fill_values(P, exps_, log_sqrt_K_, p.omega * std::polar(1.0, N() * theta), e.data());
  return to_basis(e);
}

SectionBasis::Jets SectionBasis::jets(const HeisenbergChart& chart, std::span<const cd> z,
                                      double theta) const {
  const int mm = m();
  const double Nd = N();
  ChartPoint p = chart.at(z);
  Eigen::VectorXcd u = p.Z / p.norm_Z;
  MonomialJet J = monomial_jet({u.data(), static_cast<std::size_t>(u.size())}, 1);
  const cd lift = p.omega * std::polar(1.0, Nd * theta);
  const cd iN(0.0, Nd);
  Jets out;
  out.value = J.value * lift;
  // Chain rule through Z / |Z| plus frame and connection terms.
  Eigen::MatrixXcd dP = J.grad * chart.dZ() / p.norm_Z;
  out.hol.resize(dimension(), mm);
  out.antihol.resize(dimension(), mm);
  for (int q = 0; q < mm; ++q) {
    cd hol_factor = -Nd * p.dg(q) - 0.5 * Nd * p.dlog_a(q) - iN * p.A(q);
    cd anti_factor = -0.5 * Nd * std::conj(p.dlog_a(q)) - iN * std::conj(p.A(q));
    out.hol.col(q) = (dP.col(q) + hol_factor * J.value) * lift;
    out.antihol.col(q) = anti_factor * out.value;
  }
  out.value = to_basis(out.value);
  out.hol = to_basis(out.hol);
  out.antihol = to_basis(out.antihol);
  return out;
}

Eigen::MatrixXcd SectionBasis::gram(const QuadratureGrid& grid, const Parallelism& par) const {
  Eigen::MatrixXcd G = monomial_gram(model_, grid, par);
  if (identity_) return G;
  return C_.transpose() * G * C_.conjugate();
}

nlohmann::json SectionBasis::to_json() const {
  nlohmann::json j;
  j["m"] = m();
  j["N"] = N();
  j["weight"] = model_.weight().text();
  j["dimension"] = dimension();
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : exps_) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 1; k <= m(); ++k) row.push_back(e[k]);
    ex.push_back(row);
  }
  j["monomial_exponents"] = ex;
  nlohmann::json norms = nlohmann::json::array();
  for (std::size_t k = 0; k < dimension(); ++k) norms.push_back(monomial_norm2(k));
  j["monomial_fs_norm2"] = norms;
  // Coefficients of S_j over the affine monomials w^alpha: C(alpha, j) sqrt(K_alpha).
  const std::size_t d = dimension();
  nlohmann::json coef = nlohmann::json::array();
  for (std::size_t a = 0; a < d; ++a) {
    nlohmann::json row = nlohmann::json::array();
    double sk = std::exp(log_sqrt_K_[a]);
    for (std::size_t b = 0; b < d; ++b) {
      cd c = identity_ ? cd(a == b ? 1.0 : 0.0) : C_(a, b);
      c *= sk;
      row.push_back(c.real());
      row.push_back(c.imag());
    }
    coef.push_back(row);
  }
  j["coefficients_row_major_re_im"] = coef;
  return j;
}

Eigen::MatrixXcd monomial_gram_reference(const ProjectiveModel& model, const QuadratureGrid& grid) {
  const auto exps = monomial_exponents(model.m(), model.N());
  const auto lsk = log_sqrt_norm_constants(model.m(), model.N(), exps);
  const std::size_t d = exps.size();
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(d, d);
  std::vector<cd> e(d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::VectorXcd Z = grid.nodes.col(i);
    PolarPoint P({Z.data(), static_cast<std::size_t>(Z.size())}, model.m());
    fill_values(P, exps, lsk, 1.0, e.data());
    double w = grid.weights[i] * weight_factor(model, Z);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) G(a, b) += w * e[a] * std::conj(e[b]);
  }
  return G;
}

Eigen::MatrixXcd monomial_gram(const ProjectiveModel& model, const QuadratureGrid& grid,
                               const Parallelism& par) {
  const auto exps = monomial_exponents(model.m(), model.N());
  const auto lsk = log_sqrt_norm_constants(model.m(), model.N(), exps);
  const Eigen::Index d = static_cast<Eigen::Index>(exps.size());
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  constexpr Eigen::Index kChunk = 2048;
  constexpr Eigen::Index kColBlock = 64;
  // H = V^* V accumulates conj(G); rows of V are sqrt(w_i) e(x_i).
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd V(std::min(kChunk, n), d);
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, n - start);
#pragma omp parallel for num_threads(par.workers) schedule(static)
    for (Eigen::Index r = 0; r < rows; ++r) {
      Eigen::VectorXcd Z = grid.nodes.col(start + r);
      PolarPoint P({Z.data(), static_cast<std::size_t>(Z.size())}, model.m());
      double w = std::sqrt(grid.weights[start + r] * weight_factor(model, Z));
      for (Eigen::Index a = 0; a < d; ++a) V(r, a) = w * P.power(lsk[a], exps[a]);
    }
    auto Vc = V.topRows(rows);
    const Eigen::Index blocks = (d + kColBlock - 1) / kColBlock;
#pragma omp parallel for num_threads(par.workers) schedule(dynamic)
    for (Eigen::Index b = 0; b < blocks; ++b) {
      const Eigen::Index c0 = b * kColBlock, cols = std::min(kColBlock, d - c0);
      H.middleCols(c0, cols).noalias() += Vc.adjoint() * Vc.middleCols(c0, cols);
    }
  }
  return H.conjugate();
}

SectionBasis build_basis(const ProjectiveModel& model, const Parallelism& par, int bound) {
  SectionBasis B(model);
  B.exps_ = monomial_exponents(model.m(), model.N());
  B.log_sqrt_K_ = log_sqrt_norm_constants(model.m(), model.N(), B.exps_);
  if (model.unperturbed()) return B;
  if (bound == 0) bound = 2 * model.N() + 4;
  QuadratureGrid grid = build_quadrature(model, bound);
  Eigen::MatrixXcd G = monomial_gram(model, grid, par);
  G = 0.5 * (G + G.adjoint().eval());
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Gram matrix is not positive definite (quadrature under-resolved or weight too large)");
  const Eigen::Index d = G.rows();
  Eigen::MatrixXcd Linv = llt.matrixL().solve(Eigen::MatrixXcd::Identity(d, d));
  B.C_ = Linv.transpose();
  B.identity_ = false;
  return B;
}

cd evaluate_section(const SectionBasis& basis, const Eigen::VectorXcd& c, const HeisenbergChart& chart,
                    std::span<const cd> z, double theta) {
  if (static_cast<std::size_t>(c.size()) != basis.dimension())
    throw DomainError("coefficient vector has the wrong dimension");
  return c.cwiseProduct(basis.values(chart, z, theta)).sum();
}

SectionJet horizontal_jet(const SectionBasis& basis, const Eigen::VectorXcd& c,
                          const HeisenbergChart& chart, std::span<const cd> z, double theta) {
  if (static_cast<std::size_t>(c.size()) != basis.dimension())
    throw DomainError("coefficient vector has the wrong dimension");
  SectionBasis::Jets J = basis.jets(chart, z, theta);
  SectionJet s;
  s.value = (c.transpose() * J.value)(0);
  s.hol = J.hol.transpose() * c;
  s.antihol = J.antihol.transpose() * c;
  return s;
}

}  // namespace szlab
