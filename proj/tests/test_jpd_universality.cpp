#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "szlab/errors.hpp"
#include "szlab/jet.hpp"
#include "szlab/jpd.hpp"
#include "oracles.hpp"

using namespace szlab;
using std::numbers::pi;

namespace {

using Cfg = std::vector<std::vector<cd>>;
using szlab::oracle::oracle_limit;

Cfg random_config(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Cfg z(n, std::vector<cd>(m));
  for (auto& p : z)
    for (auto& c : p) c = cd(g(rng), g(rng));
  return z;
}

}  // namespace

TEST_CASE("limit covariance closed forms") {
  auto one = covariance_limit({{0.0}}, 1);
  CHECK(std::abs(one.A(0, 0) - 1.0 / pi) < 1e-15);
  CHECK(one.B.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(one.C(0, 0) - 1.0 / pi) < 1e-15);
  CHECK(one.C(1, 1) == 0.0);
  auto two = covariance_limit({{0.0}, {1.0}}, 1);
  CHECK(std::abs(two.A(0, 1) - std::exp(-0.5) / pi) < 1e-15);
  auto m2 = covariance_limit({{0.0, 0.0}}, 2);
  CHECK(std::abs(m2.A(0, 0) - 2.0 / (pi * pi)) < 1e-15);
  CHECK(std::abs(covariance_limit({{0.0}}, 1, 2.0).A(0, 0) - 0.5 / pi) < 1e-15);
  CHECK_THROWS_AS(covariance_limit({{0.0, 1.0}}, 1), DomainError);
  CHECK_THROWS_AS(covariance_limit({}, 1), DomainError);
}

TEST_CASE("limit covariance matches automatic differentiation of the Heisenberg kernel") {
  for (int m = 1; m <= 2; ++m)
    for (int n = 1; n <= 4; ++n)
      for (std::uint64_t s = 0; s < 3; ++s) {
        Cfg z = random_config(m, n, 100 * m + 10 * n + s);
        Eigen::MatrixXcd L = covariance_limit(z, m).assembled();
        Eigen::MatrixXcd O = oracle_limit(z, m);
        CHECK((L - O).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((L - L.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(L);
        CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
      }
}

TEST_CASE("exact covariance at finite N") {
  SUBCASE("center of the Fubini-Study line") {
    auto model = ProjectiveModel::make(1, 10);
    auto basis = build_basis(model);
    auto chart = HeisenbergChart::at_origin(model);
    KernelEvaluator K(basis, chart);
    auto c = covariance_exact(K, {{0.0}});
    CHECK(std::abs(c.A(0, 0) - 1.0 / pi) < 1e-14);
    CHECK(c.antiholomorphic_max() < 1e-14);
    CHECK(c.holomorphic_indices() == std::vector<int>{0, 1});
  }
  SUBCASE("kernel route equals the jet-map route and the Gaussian pushforward") {
    for (const char* w : {"0", "0.1*r2/(1+r2)"}) {
      auto model = ProjectiveModel::make(1, 24, w);
      auto basis = build_basis(model);
      auto chart = HeisenbergChart::at_affine(model, std::vector<cd>{cd(0.3, 0.1)});
      KernelEvaluator K(basis, chart);
      Cfg x = scaled_points({{0.0}, {cd(0.5, 0.5)}, {cd(-1.0, 0.2)}}, 24);
      Eigen::MatrixXcd E = covariance_exact(K, x).assembled();
      Eigen::MatrixXcd J = jet_map(K, x);
      const double d = static_cast<double>(basis.dimension());
      CHECK((E - J * J.adjoint() / d).cwiseAbs().maxCoeff() < 1e-13);
      auto mu = GeneralizedGaussian::complex(Eigen::MatrixXcd::Identity(J.cols(), J.cols()) / d);
      CHECK((pushforward(J, mu).covariance() - E).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(CovarianceBlocks::from_assembled(E, 3, 1).antiholomorphic_max() < 1e-8 * E.cwiseAbs().maxCoeff());
    }
  }
  SUBCASE("rejections") {
    auto model = ProjectiveModel::make(1, 16);
    auto basis = build_basis(model);
    auto chart = HeisenbergChart::at_origin(model);
    KernelEvaluator K(basis, chart);
    CHECK_THROWS_AS(covariance_exact(K, {{0.1}, {0.1 + 1e-8}}), DomainError);
    CHECK_NOTHROW(covariance_exact(K, {{0.1}, {0.1 + 1e-6}}));
    CHECK_THROWS_AS(covariance_exact(K, {{0.1, 0.2}}), DomainError);
    Cfg many(80, std::vector<cd>{0.0});
    for (int i = 0; i < 80; ++i) many[i][0] = 0.01 * i;
    CHECK_THROWS_AS(covariance_exact(K, many), ResourceCapError);
  }
}

TEST_CASE("covariance transforms covariantly under chart rotation") {
  auto model = ProjectiveModel::make(2, 6, "0.1*(x1^2+y1^2)/(1+r2)");
  auto basis = build_basis(model);
  std::vector<cd> base{1.0, cd(0.2, -0.1), cd(0.1, 0.3)};
  Eigen::MatrixXcd R(2, 2);
  R << cd(0.6, 0.0), cd(0.0, 0.8), cd(0.0, 0.8), cd(0.6, 0.0);
  auto c1 = HeisenbergChart::make(model, base);
  auto c2 = HeisenbergChart::make(model, base, R);
  KernelEvaluator K1(basis, c1), K2(basis, c2);
  Cfg z2{{cd(0.2, 0.1), cd(-0.1, 0.0)}, {cd(0.0, 0.3), cd(0.25, -0.2)}};
  // Same geometric points in the unrotated chart.
  Cfg z1;
  for (const auto& p : z2) {
    Eigen::VectorXcd Z = c2.to_homogeneous(p);
    Eigen::VectorXcd w = c1.to_chart({Z.data(), static_cast<std::size_t>(Z.size())});
    z1.push_back({w(0), w(1)});
  }
  Eigen::MatrixXcd D1 = covariance_exact(K1, z1).assembled();
  Eigen::MatrixXcd D2 = covariance_exact(K2, z2).assembled();
  // Values are frame-identical; derivative slots transform by the Jacobian.
  Eigen::MatrixXcd Jac(2, 2);
  {
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
      auto shift = [&](double s) {
        std::vector<cd> p = z2[0];
        p[k] += s;
        Eigen::VectorXcd Z = c2.to_homogeneous(p);
        return Eigen::VectorXcd(c1.to_chart({Z.data(), static_cast<std::size_t>(Z.size())}));
      };
      Jac.col(k) = (shift(h) - shift(-h)) / (2 * h);
    }
  }
  CHECK((Jac - R).cwiseAbs().maxCoeff() < 1e-8);
  const int n = 2, m = 2;
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(10, 10);
  for (int p = 0; p < n; ++p) {
    T(p, p) = 1.0;
    for (int q = 0; q < m; ++q)
      for (int k = 0; k < m; ++k) {
        T(jet_index(n, m, p, 1 + q), jet_index(n, m, p, 1 + k)) = R(k, q);
        T(jet_index(n, m, p, 1 + m + q), jet_index(n, m, p, 1 + m + k)) = std::conj(R(k, q));
      }
  }
  CHECK((D2 - T * D1 * T.adjoint()).cwiseAbs().maxCoeff() < 1e-8 * D1.cwiseAbs().maxCoeff());
  CHECK((D2.topLeftCorner(2, 2) - D1.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Fubini-Study covariance does not depend on the chart center") {
  auto model = ProjectiveModel::make(1, 20);
  auto basis = build_basis(model);
  auto c0 = HeisenbergChart::at_origin(model);
  auto c1 = HeisenbergChart::make(model, std::vector<cd>{cd(0.3, 0.4), cd(-1.2, 0.5)});
  KernelEvaluator K0(basis, c0), K1(basis, c1);
  Cfg x = scaled_points({{cd(0.1, 0.2)}, {cd(-0.7, 0.4)}}, 20);
  CHECK((covariance_exact(K0, x).assembled() - covariance_exact(K1, x).assembled()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("scaling convergence to the universal limit") {
  const std::vector<cd> base{1.0, 0.0};
  auto s = scaling_convergence(1, "0", base, {{0.0}, {1.0}}, {32, 64, 128, 256}, Parallelism{2});
  REQUIRE(s.reports.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(s.reports[i].max_dev < s.reports[i - 1].max_dev);
  const auto& last = s.reports.back();
  CHECK(last.max_dev <= 0.05 * last.limit.cwiseAbs().maxCoeff());
  for (const auto& r : s.reports) {
    CHECK(std::abs(r.exact(0, 0) - 1.0 / pi) < 1e-13);
    CHECK(r.antihol_max < 1e-8 * r.exact.cwiseAbs().maxCoeff());
    CHECK(r.spectral_dev >= 0.0);
  }
  auto csv = s.to_csv();
  CHECK(csv.rfind("N,max_dev,spectral_dev,n_samples\r\n32,", 0) == 0);
  auto j = s.to_json();
  CHECK(j["reports"].size() == 4);
  CHECK(j["reports"][0]["exact"][0][0][0].get<double>() == doctest::Approx(1.0 / pi));

  SUBCASE("perturbed metric and m = 2") {
    auto p = scaling_convergence(1, "0.1*r2/(1+r2)", std::vector<cd>{1.0, cd(0.2, 0.1)}, {{0.0}, {1.0}},
                                 {16, 32, 64}, Parallelism{2});
    CHECK(p.reports[2].max_dev < p.reports[1].max_dev);
    CHECK(p.reports[1].max_dev < p.reports[0].max_dev);
    auto q = scaling_convergence(2, "0", std::vector<cd>{1.0, 0.0, 0.0}, {{0.0, 0.0}, {cd(0.5, 0.0), cd(0.0, 0.5)}},
                                 {8, 16, 32}, Parallelism{2});
    CHECK(q.reports[2].max_dev < q.reports[1].max_dev);
    CHECK(q.reports[1].max_dev < q.reports[0].max_dev);
  }
  CHECK_THROWS_AS(scaling_convergence(1, "0", base, {{0.0}}, {32, 32}, Parallelism{1}), DomainError);
}

TEST_CASE("empirical JPD under both ensembles") {
  auto model = ProjectiveModel::make(1, 64);
  auto basis = build_basis(model);
  auto chart = HeisenbergChart::at_origin(model);
  KernelEvaluator K(basis, chart);
  const Cfg z{{0.0}, {1.0}};
  auto sph = empirical_jpd(K, z, Ensemble::sphere, 20000, 11, Parallelism{2});
  auto gau = empirical_jpd(K, z, Ensemble::gaussian, 20000, 12, Parallelism{2});
  for (const auto* r : {&sph, &gau}) {
    CHECK(r->n_samples == 20000);
    CHECK(r->max_zscore <= 5.0);
    auto blocks = CovarianceBlocks::from_assembled(r->empirical, 2, 1);
    CHECK(blocks.antiholomorphic_max() < 1e-8 * r->empirical.cwiseAbs().maxCoeff());
    CHECK(r->marginal_histogram.size() == 20);
  }
  // Complex Gaussian value: E|x|^4 / (E|x|^2)^2 = 2; sphere: 2 d / (d + 1).
  CHECK(std::abs(gau.kurtosis - 2.0) <= 5 * gau.kurtosis_se);
  CHECK(std::abs(sph.kurtosis - 2.0 * 65 / 66) <= 5 * sph.kurtosis_se);
  Eigen::ArrayXXd comb = (sph.empirical_se.array().square() + gau.empirical_se.array().square()).sqrt();
  Eigen::ArrayXXd diff = (sph.empirical - gau.empirical).cwiseAbs().array();
  CHECK((diff <= 5 * comb + 1e-300).all());
  auto j = sph.to_json();
  CHECK(j["ensemble"] == "sphere");
  CHECK(j["empirical_se"].size() == 6);
  CHECK_THROWS_AS(empirical_jpd(K, z, Ensemble::sphere, 10, 1, Parallelism{1}), DomainError);
}

TEST_CASE("jackknife of a mean is the block standard error") {
  Eigen::MatrixXd sums(4, 1);
  sums << 1.0, 2.0, 3.0, 6.0;
  Eigen::VectorXd counts = Eigen::VectorXd::Constant(4, 1.0);
  auto [v, se] = jackknife(sums, counts, [](const Eigen::VectorXd& mu) { return mu(0); });
  CHECK(v == doctest::Approx(3.0));
  // sample sd of {1,2,3,6} / sqrt(4)
  double sd = std::sqrt(((4.0 + 1.0 + 0.0 + 9.0) / 3.0) / 4.0);
  CHECK(se == doctest::Approx(sd));
}
