#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "szlab/chart.hpp"
#include "szlab/errors.hpp"
#include "szlab/model.hpp"
#include "szlab/quadrature.hpp"

using namespace szlab;
using std::numbers::pi;

namespace {

double binom(int n, int k) { return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))); }

double factorial(int n) { return std::tgamma(n + 1.0); }

const char* kEps = "0.1*r2/(1+r2)";

}  // namespace

TEST_CASE("section dimension is the monomial count") {
  CHECK(section_dimension(1, 3) == 4);
  CHECK(section_dimension(2, 1) == 3);
  for (int m = 1; m <= 2; ++m)
    for (int N = 0; N <= 256 / m; N += 7) CHECK(section_dimension(m, N) == binom(N + m, m));
}

TEST_CASE("model construction and validation") {
  auto fs = ProjectiveModel::make(1, 3);
  CHECK(fs.unperturbed());
  CHECK(fs.volume() == doctest::Approx(pi).epsilon(1e-15));
  CHECK(fs.dimension() == 4);
  CHECK(ProjectiveModel::make(2, 2).volume() == doctest::Approx(pi * pi / 2));

  auto pert = ProjectiveModel::make(1, 2, kEps);
  CHECK_FALSE(pert.unperturbed());
  CHECK(pert.weight_amplitude() == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(ProjectiveModel::make(1, 2, "0*x1").unperturbed() == false);
  CHECK(ProjectiveModel::make(1, 2, "0").unperturbed());
  CHECK(ProjectiveModel::make(1, 2, "2-2").unperturbed());

  CHECK_THROWS_AS(ProjectiveModel::make(3, 2), DomainError);
  CHECK_THROWS_AS(ProjectiveModel::make(1, 0), DomainError);
  CHECK_THROWS_AS(ProjectiveModel::make(1, 2, "x1"), DomainError);
  CHECK_THROWS_AS(ProjectiveModel::make(1, 2, "r2"), DomainError);
  // Bounded but direction dependent at infinity.
  CHECK_THROWS_AS(ProjectiveModel::make(1, 2, "x1^2/(1+r2)"), DomainError);
  CHECK_THROWS_AS(ProjectiveModel::make(2, 2, "x1^2/(1+r2)"), DomainError);
  // Continuous at infinity.
  CHECK_NOTHROW(ProjectiveModel::make(1, 2, "0.05*x1/(1+r2)"));
  CHECK_NOTHROW(ProjectiveModel::make(2, 2, "0.1*(x1^2+y1^2)/(1+r2)"));
  // Curvature form must stay positive.
  CHECK_THROWS_AS(ProjectiveModel::make(1, 2, "-5*r2/(1+r2)"), DomainError);
  CHECK_THROWS_AS(ProjectiveModel::make(1, 2000), ResourceCapError);
  CHECK_THROWS_AS(ProjectiveModel::make(2, 70), ResourceCapError);
}

TEST_CASE("weight grammar errors carry positions") {
  try {
    ProjectiveModel::make(1, 2, "0.1*(r2");
    FAIL("expected a parse error");
  } catch (const WeightParseError& e) {
    CHECK(e.position() == 7);
  }
  try {
    ProjectiveModel::make(1, 2, "x2/(1+r2)");
    FAIL("expected a parse error");
  } catch (const WeightParseError& e) {
    CHECK(e.position() == 0);
  }
  CHECK_THROWS_AS(WeightExpr::parse("r2 $", 1), WeightParseError);
  CHECK_THROWS_AS(WeightExpr::parse("", 1), WeightParseError);
  CHECK_THROWS_AS(WeightExpr::parse("r2^x1", 1), WeightParseError);
  auto e = WeightExpr::parse("2*x1 - y1^2 + r2/(1+r2)", 1);
  std::vector<cd> w{cd(0.5, -1.5)};
  CHECK(e.value(w) == doctest::Approx(1.0 - 2.25 + 2.5 / 3.5));
  auto g = e.gradient(w);
  // d/dz = (d/dx - i d/dy) / 2 applied term by term.
  double y = -1.5, r = 2.5;
  cd expected = 1.0 + cd(0.0, 1.0) * y + std::conj(w[0]) / ((1 + r) * (1 + r));
  CHECK(std::abs(g[0] - expected) < 1e-14);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  for (int n : {1, 2, 5, 17, 64}) {
    gauss_legendre01(n, x, w);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("quadrature matches closed-form Beta values") {
  SUBCASE("volume") {
    CHECK(build_quadrature(1, 4).total_weight() == doctest::Approx(pi).epsilon(1e-12));
    CHECK(build_quadrature(2, 4).total_weight() == doctest::Approx(pi * pi / 2).epsilon(1e-12));
    auto g = build_quadrature(ProjectiveModel::make(1, 3, kEps), 12);
    CHECK(std::abs(g.total_weight() - pi) < 1e-10 * pi);
  }
  SUBCASE("m = 1 table") {
    for (int N : {0, 1, 4, 9}) {
      auto g = build_quadrature(1, 2 * N + 4);
      for (int k = 0; k <= N; ++k) {
        for (int l = 0; l <= N; ++l) {
          cd s = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) {
            cd Z0 = g.nodes(0, i), Z1 = g.nodes(1, i);
            s += g.weights[i] * std::pow(Z1, k) * std::pow(std::conj(Z1), l) *
                 std::pow(std::abs(Z0), 2 * N - k - l);
          }
          if (k == l) {
            double exact = pi * factorial(k) * factorial(N - k) / factorial(N + 1);
            CHECK(std::abs(s - exact) < 1e-9 * exact);
          } else {
            CHECK(std::abs(s) < 1e-12);
          }
        }
      }
    }
  }
  SUBCASE("m = 2 table") {
    const int N = 6;
    auto g = build_quadrature(2, 2 * N + 4);
    for (int a = 0; a <= N; ++a)
      for (int b = 0; a + b <= N; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
          s += g.weights[i] * std::pow(std::norm(g.nodes(1, i)), a) * std::pow(std::norm(g.nodes(2, i)), b) *
               std::pow(std::norm(g.nodes(0, i)), N - a - b);
        double exact = pi * pi * factorial(a) * factorial(b) * factorial(N - a - b) / factorial(N + 2);
        CHECK(std::abs(s - exact) < 1e-9 * exact);
      }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_quadrature(ProjectiveModel::make(1, 4), 10), DomainError);
    CHECK_THROWS_AS(build_quadrature(2, 4000), ResourceCapError);
  }
}

namespace {

void check_chart_invariants(const HeisenbergChart& c) {
  const int m = c.m();
  std::vector<cd> zero(m, 0.0);
  Jet2 a = c.frame_weight_jet(zero);
  CHECK(std::abs(a.v - 1.0) < 1e-12);
  for (int k = 0; k < 2 * m; ++k) CHECK(std::abs(a.g[k]) < 1e-10);
  for (int q = 0; q < m; ++q)
    for (int r = 0; r < m; ++r) {
      CHECK(std::abs(wirtinger_dz_dzbar(a, q, r) - (q == r ? 1.0 : 0.0)) < 1e-8);
      CHECK(std::abs(wirtinger_dz_dz(a, q, r)) < 1e-8);
    }
  Eigen::MatrixXcd G = c.kahler_metric(zero);
  CHECK((G - Eigen::MatrixXcd::Identity(m, m)).norm() < 1e-10);
  CHECK(c.connection(zero).norm() < 1e-10);
  // A_q(z) = -(i/2) conj(z_q) + O(|z|^2): remainder / |z|^2 stays bounded as z shrinks.
  std::vector<cd> z1(m), z2(m);
  for (int q = 0; q < m; ++q) {
    z1[q] = cd(0.02 * (q + 1), -0.013);
    z2[q] = 0.5 * z1[q];
  }
  auto rem = [&](const std::vector<cd>& z) {
    Eigen::VectorXcd A = c.connection(z);
    double e = 0.0;
    for (int q = 0; q < m; ++q) e += std::norm(A(q) + cd(0.0, 0.5) * std::conj(z[q]));
    return std::sqrt(e);
  };
  double n1 = 0.0;
  for (auto v : z1) n1 += std::norm(v);
  CHECK(rem(z1) / n1 < 2.0);
  CHECK(rem(z2) / (0.25 * n1) < 2.0);
  std::vector<cd> z3(z1);
  for (auto& v : z3) v *= 0.01;
  CHECK(rem(z3) / (1e-4 * n1) < 2.0);
}

}  // namespace

TEST_CASE("Heisenberg chart: Fubini-Study closed forms") {
  auto model = ProjectiveModel::make(1, 5);
  auto c = HeisenbergChart::at_origin(model);
  for (cd z : {cd(0.3, -0.2), cd(1.5, 0.7), cd(-2.0, 3.0)}) {
    std::vector<cd> zz{z};
    double r2 = std::norm(z);
    CHECK(c.frame_weight(zz) == doctest::Approx(1.0 + r2).epsilon(1e-13));
    cd A = c.connection(zz)(0);
    CHECK(std::abs(A - cd(0.0, -0.5) * std::conj(z) / (1.0 + r2)) < 1e-14);
  }
  check_chart_invariants(c);
}

TEST_CASE("Heisenberg chart invariants at random base points") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int m = 1; m <= 2; ++m) {
    for (const char* w : {"0", kEps, "0.05*x1/(1+r2)"}) {
      auto model = ProjectiveModel::make(m, 4, w);
      for (int trial = 0; trial < 4; ++trial) {
        std::vector<cd> P(m + 1);
        for (auto& p : P) p = cd(n01(rng), n01(rng));
        Eigen::MatrixXcd R;
        if (m == 2 && trial % 2 == 1) {
          Eigen::MatrixXcd X(2, 2);
          for (int i = 0; i < 4; ++i) X(i / 2, i % 2) = cd(n01(rng), n01(rng));
          R = X.householderQr().householderQ();
        }
        auto c = HeisenbergChart::make(model, P, R);
        check_chart_invariants(c);
        // Coordinates round-trip through homogeneous points.
        std::vector<cd> z(m, cd(0.31, -0.4));
        Eigen::VectorXcd Z = c.to_homogeneous(z);
        Eigen::VectorXcd back = c.to_chart({Z.data(), static_cast<std::size_t>(Z.size())});
        for (int q = 0; q < m; ++q) CHECK(std::abs(back(q) - z[q]) < 1e-12);
      }
    }
  }
}

TEST_CASE("chart domain checks") {
  auto c = HeisenbergChart::at_origin(ProjectiveModel::make(1, 3));
  std::vector<cd> far{cd(11.0, 0.0)};
  CHECK_THROWS_AS(c.at(far), DomainError);
  std::vector<cd> bad{cd(0.1), cd(0.2)};
  CHECK_THROWS_AS(c.at(bad), DomainError);
  std::vector<cd> zero_base{0.0, 0.0};
  CHECK_THROWS_AS(HeisenbergChart::make(ProjectiveModel::make(1, 3), zero_base), DomainError);
}
