#include "szlab/chart.hpp"

#include <cmath>
#include <vector>

#include "szlab/errors.hpp"

namespace szlab {

namespace {

cd eval_g(cd g0, const Eigen::VectorXcd& g1, const Eigen::MatrixXcd& g2, std::span<const cd> z) {
  cd v = g0;
  const int m = static_cast<int>(z.size());
  for (int q = 0; q < m; ++q) {
    v += g1(q) * z[q];
    for (int r = 0; r < m; ++r) v += 0.5 * g2(q, r) * z[q] * z[r];
  }
  return v;
}

}  // namespace

HeisenbergChart HeisenbergChart::make(const ProjectiveModel& model, std::span<const cd> base,
                                      const Eigen::MatrixXcd& rotation) {
  const int m = model.m();
  if (static_cast<int>(base.size()) != m + 1)
    throw DomainError("base point needs m+1 homogeneous coordinates");
  Eigen::VectorXcd p(m + 1);
  for (int k = 0; k <= m; ++k) p(k) = base[k];
  double n = p.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("base point must be a nonzero vector");
  p /= n;

  HeisenbergChart c(model);
  // Complete p to a unitary whose first column is exactly p.
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(m + 1, m + 1);
  M.col(0) = p;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
  Eigen::MatrixXcd Q = qr.householderQ();
  Q.col(0) = p;  // equals the Householder column up to a unit phase
  if (rotation.size() > 0) {
    if (rotation.rows() != m || rotation.cols() != m)
      throw DomainError("rotation must be m x m");
    if ((rotation.adjoint() * rotation - Eigen::MatrixXcd::Identity(m, m)).norm() > 1e-10)
      throw DomainError("rotation must be unitary");
    Q.rightCols(m) = Q.rightCols(m) * rotation;
  }
  c.U_ = Q;
  c.L_ = Eigen::MatrixXcd::Identity(m, m);
  c.dZ_ = c.U_.rightCols(m);
  c.g1_ = Eigen::VectorXcd::Zero(m);
  c.g2_ = Eigen::MatrixXcd::Zero(m, m);
  if (model.unperturbed()) return c;

  std::vector<cd> zero(m, 0.0);
  Jet2 f = c.potential_jet(zero);
  Eigen::MatrixXcd G(m, m);
  for (int q = 0; q < m; ++q)
    for (int r = 0; r < m; ++r) G(q, r) = wirtinger_dz_dzbar(f, q, r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("potential Hessian is not positive at the base point");
  c.L_ = es.operatorInverseSqrt().conjugate();
  c.dZ_ = c.U_.rightCols(m) * c.L_;

  f = c.potential_jet(zero);
  c.g0_ = 0.5 * f.v;
  for (int q = 0; q < m; ++q) {
    c.g1_(q) = wirtinger_dz(f, q);
    for (int r = 0; r < m; ++r) c.g2_(q, r) = wirtinger_dz_dz(f, q, r);
  }
  return c;
}

HeisenbergChart HeisenbergChart::at_origin(const ProjectiveModel& model) {
  std::vector<cd> e(model.m() + 1, 0.0);
  e[0] = 1.0;
  return make(model, e);
}

HeisenbergChart HeisenbergChart::at_affine(const ProjectiveModel& model, std::span<const cd> w) {
  if (static_cast<int>(w.size()) != model.m()) throw DomainError("affine point needs m coordinates");
  std::vector<cd> e(model.m() + 1, 1.0);
  for (int j = 0; j < model.m(); ++j) e[j + 1] = w[j];
  return make(model, e);
}

void HeisenbergChart::check_domain(std::span<const cd> z) const {
  if (static_cast<int>(z.size()) != m()) throw DomainError("chart point needs m coordinates");
  double r2 = 0.0;
  for (auto c : z) r2 += std::norm(c);
  if (!std::isfinite(r2) || std::sqrt(r2) > radius_)
    throw DomainError("point outside the chart validity radius");
}

Eigen::VectorXcd HeisenbergChart::to_homogeneous(std::span<const cd> z) const {
  check_domain(z);
  Eigen::VectorXcd Z = U_.col(0);
  for (int q = 0; q < m(); ++q) Z += dZ_.col(q) * z[q];
  return Z / Z.norm();
}

Eigen::VectorXcd HeisenbergChart::to_chart(std::span<const cd> Zs) const {
  if (static_cast<int>(Zs.size()) != m() + 1) throw DomainError("need m+1 homogeneous coordinates");
  Eigen::VectorXcd Z(m() + 1);
  for (int k = 0; k <= m(); ++k) Z(k) = Zs[k];
  Eigen::VectorXcd zeta = U_.adjoint() * Z;
  if (std::abs(zeta(0)) < 1e-14 * Z.norm()) throw DomainError("point lies at infinity of this chart");
  Eigen::VectorXcd t = zeta.tail(m()) / zeta(0);
  return L_.partialPivLu().solve(t);
}

ChartPoint HeisenbergChart::at(std::span<const cd> z) const {
  check_domain(z);
  const int mm = m();
  const int N = model_.N();
  ChartPoint p;
  p.Z = U_.col(0);
  for (int q = 0; q < mm; ++q) p.Z += dZ_.col(q) * z[q];
  p.norm_Z = p.Z.norm();
  p.dlog_a = (p.Z.adjoint() * dZ_).transpose() / (p.norm_Z * p.norm_Z);
  p.dg = g1_ + g2_ * Eigen::Map<const Eigen::VectorXcd>(z.data(), mm);
  double phi = 0.0;
  if (!model_.unperturbed()) {
    cd Z0 = p.Z(0);
    if (std::abs(Z0) < 1e-9 * p.norm_Z)
      throw DomainError("chart point too close to the weight's singular hyperplane");
    std::vector<cd> w(mm);
    for (int j = 0; j < mm; ++j) w[j] = p.Z(j + 1) / Z0;
    phi = model_.phi(w);
    std::vector<cd> grad = model_.weight().gradient(w);
    for (int q = 0; q < mm; ++q) {
      cd dphi = 0.0;
      for (int j = 0; j < mm; ++j)
        dphi += grad[j] * (dZ_(j + 1, q) * Z0 - p.Z(j + 1) * dZ_(0, q)) / (Z0 * Z0);
      p.dlog_a(q) += dphi;
    }
    p.dlog_a -= p.dg;
  }
  p.A = cd(0.0, -0.5) * p.dlog_a;
  double img = eval_g(g0_, g1_, g2_, z).imag();
  p.omega = std::exp(-0.5 * N * phi) * std::polar(1.0, -N * img);
  return p;
}

Jet2 HeisenbergChart::potential_jet(std::span<const cd> z) const {
  const int mm = m();
  std::vector<CJet> zj(mm);
  for (int q = 0; q < mm; ++q)
    zj[q] = CJet(Jet2::variable(z[q].real(), 2 * q), Jet2::variable(z[q].imag(), 2 * q + 1));
  std::vector<CJet> Z(mm + 1);
  for (int k = 0; k <= mm; ++k) {
    Z[k] = CJet(U_(k, 0));
    for (int q = 0; q < mm; ++q) Z[k] = Z[k] + CJet(dZ_(k, q)) * zj[q];
  }
  Jet2 r2(0.0);
  for (const auto& c : Z) r2 = r2 + norm2(c);
  Jet2 f = log(r2);
  if (!model_.unperturbed()) {
    if (std::abs(cd(Z[0].re.v, Z[0].im.v)) < 1e-9 * std::sqrt(r2.v))
      throw DomainError("chart point too close to the weight's singular hyperplane");
    std::vector<CJet> w(mm);
    for (int j = 0; j < mm; ++j) w[j] = Z[j + 1] / Z[0];
    f = f + model_.weight().jet(w);
  }
  return f;
}

double HeisenbergChart::frame_weight(std::span<const cd> z) const {
  check_domain(z);
  return frame_weight_jet(z).v;
}

Jet2 HeisenbergChart::frame_weight_jet(std::span<const cd> z) const {
  check_domain(z);
  const int mm = m();
  Jet2 f = potential_jet(z);
  // Re g as a jet: g is a quadratic polynomial in z.
  std::vector<CJet> zj(mm);
  for (int q = 0; q < mm; ++q)
    zj[q] = CJet(Jet2::variable(z[q].real(), 2 * q), Jet2::variable(z[q].imag(), 2 * q + 1));
  CJet g(g0_);
  for (int q = 0; q < mm; ++q) {
    g = g + CJet(g1_(q)) * zj[q];
    for (int r = 0; r < mm; ++r) g = g + CJet(0.5 * g2_(q, r)) * zj[q] * zj[r];
  }
  return exp(f - 2.0 * g.re);
}

Eigen::MatrixXcd HeisenbergChart::kahler_metric(std::span<const cd> z) const {
  check_domain(z);
  Jet2 f = potential_jet(z);
  Eigen::MatrixXcd G(m(), m());
  for (int q = 0; q < m(); ++q)
    for (int r = 0; r < m(); ++r) G(q, r) = wirtinger_dz_dzbar(f, q, r);
  return G;
}

}  // namespace szlab
