#pragma once

// Independent reference for the limit jet covariance: forward-mode jets of
// the Heisenberg kernel, shared by the unit tests and the acceptance run.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "szlab/jet.hpp"
#include "szlab/jpd.hpp"

namespace szlab::oracle {

using std::numbers::pi;

inline Jet2 jcos(const Jet2& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 jsin(const Jet2& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline CJet cexp(const CJet& a) {
  Jet2 r = exp(a.re);
  return {r * jcos(a.im), r * jsin(a.im)};
}
inline CJet cconj(const CJet& a) { return {a.re, -a.im}; }

inline cd dz(const CJet& F, int v) { return wirtinger_dz(F.re, v) + cd(0, 1) * wirtinger_dz(F.im, v); }
inline cd dzbar(const CJet& F, int v) { return std::conj(wirtinger_dz(F.re, v)) + cd(0, 1) * std::conj(wirtinger_dz(F.im, v)); }
// d/du d/dvbar with u at variable slot 0 and v at slot 1.
inline cd du_dvbar(const CJet& F) { return wirtinger_dz_dzbar(F.re, 0, 1) + cd(0, 1) * wirtinger_dz_dzbar(F.im, 0, 1); }
inline cd du_dv(const CJet& F) { return wirtinger_dz_dz(F.re, 0, 1) + cd(0, 1) * wirtinger_dz_dz(F.im, 0, 1); }
inline cd dubar_dvbar(const CJet& F) {
  return std::conj(wirtinger_dz_dz(F.re, 0, 1)) + cd(0, 1) * std::conj(wirtinger_dz_dz(F.im, 0, 1));
}
inline cd dubar_dv(const CJet& F) {
  return std::conj(wirtinger_dz_dzbar(F.re, 0, 1)) + cd(0, 1) * std::conj(wirtinger_dz_dzbar(F.im, 0, 1));
}

// Heisenberg kernel (m!/pi^m) exp(u.conj(v) - |u|^2/2 - |v|^2/2) with u_q and
// v_q2 as the only jet variables, differentiated by the horizontal rules
//   d^h/du = d/du - ubar/2,  d^h/dubar = d/dubar + u/2
// applied to the first slot and conjugated rules to the second.
inline Eigen::MatrixXcd oracle_limit(const std::vector<std::vector<cd>>& z, int m) {
  const int n = static_cast<int>(z.size());
  const double k = std::tgamma(m + 1.0) / std::pow(pi, m);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n * (2 * m + 1), n * (2 * m + 1));
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < m; ++q)
        for (int q2 = 0; q2 < m; ++q2) {
          std::vector<CJet> u(m), v(m);
          for (int a = 0; a < m; ++a) {
            u[a] = z[p][a];
            v[a] = z[r][a];
          }
          u[q] = CJet(Jet2::variable(z[p][q].real(), 0), Jet2::variable(z[p][q].imag(), 1));
          v[q2] = CJet(Jet2::variable(z[r][q2].real(), 2), Jet2::variable(z[r][q2].imag(), 3));
          CJet e(0.0);
          for (int a = 0; a < m; ++a) e = e + u[a] * cconj(v[a]) - CJet(0.5 * norm2(u[a]), 0.0) - CJet(0.5 * norm2(v[a]), 0.0);
          CJet F = CJet(k) * cexp(e);
          cd uq = z[p][q], vq = z[r][q2];
          cd val(F.re.v, F.im.v);
          M(jet_index(n, m, p, 0), jet_index(n, m, r, 0)) = val;
          // value x derivative at v (conjugated rules): hol -> d/dvbar - v/2, antihol -> d/dv + vbar/2
          M(jet_index(n, m, p, 0), jet_index(n, m, r, 1 + q2)) = dzbar(F, 1) - 0.5 * vq * val;
          M(jet_index(n, m, p, 0), jet_index(n, m, r, 1 + m + q2)) = dz(F, 1) + 0.5 * std::conj(vq) * val;
          M(jet_index(n, m, p, 1 + q), jet_index(n, m, r, 0)) = dz(F, 0) - 0.5 * std::conj(uq) * val;
          M(jet_index(n, m, p, 1 + m + q), jet_index(n, m, r, 0)) = dzbar(F, 0) + 0.5 * uq * val;
          // derivative x derivative
          cd hh = du_dvbar(F) - 0.5 * vq * dz(F, 0) - 0.5 * std::conj(uq) * dzbar(F, 1) +
                  0.25 * std::conj(uq) * vq * val;
          cd ha = du_dv(F) + 0.5 * std::conj(vq) * dz(F, 0) - 0.5 * std::conj(uq) * dz(F, 1) -
                  0.25 * std::conj(uq) * std::conj(vq) * val;
          cd ah = dubar_dvbar(F) - 0.5 * vq * dzbar(F, 0) + 0.5 * uq * dzbar(F, 1) - 0.25 * uq * vq * val;
          cd aa = dubar_dv(F) + 0.5 * std::conj(vq) * dzbar(F, 0) + 0.5 * uq * dz(F, 1) +
                  0.25 * uq * std::conj(vq) * val;
          M(jet_index(n, m, p, 1 + q), jet_index(n, m, r, 1 + q2)) = hh;
          M(jet_index(n, m, p, 1 + q), jet_index(n, m, r, 1 + m + q2)) = ha;
          M(jet_index(n, m, p, 1 + m + q), jet_index(n, m, r, 1 + q2)) = ah;
          M(jet_index(n, m, p, 1 + m + q), jet_index(n, m, r, 1 + m + q2)) = aa;
        }
  return M;
}

}  // namespace szlab::oracle
