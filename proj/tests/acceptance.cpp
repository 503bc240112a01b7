// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "szlab/global.hpp"
#include "szlab/jpd.hpp"
#include "szlab/kernel.hpp"
#include "szlab/measures.hpp"
#include "szlab/model.hpp"
#include "szlab/section_basis.hpp"

using namespace szlab;
using std::numbers::pi;

namespace {

const char* kEps = "0.1*r2/(1+r2)";
const Parallelism kPar = Parallelism::resolve(0);

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string f(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Verdict dimension_law() {
  Verdict v;
  bool exact = true;
  for (int m = 1; m <= 2; ++m)
    for (int N = 0; N <= 256 / m; ++N) exact = exact && section_dimension(m, N) == binomial(N + m, m);
  v.require(exact, "d_N = binomial(N+m, m) for m = 1, N <= 256 and m = 2, N <= 128");
  double r = static_cast<double>(section_dimension(1, 100)) / 100.0;
  v.require(std::abs(r - 1.0) <= 0.05, f("d_N m!/N^m = %.4f at N = 100", r));
  return v;
}

Verdict diagonal_density_check() {
  Verdict v;
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int N : {10, 100}) {
    auto basis = build_basis(ProjectiveModel::make(1, N), kPar);
    for (int i = 0; i < 10; ++i) {
      std::vector<cd> Z{cd(g(rng), g(rng)), cd(g(rng), g(rng))};
      double rho = diagonal_density(basis, Z);
      worst = std::max(worst, std::abs(rho * pi / (N + 1.0) - 1.0));
    }
  }
  v.require(worst < 1e-9, f("Fubini-Study Pi_N(x,x) vs (N+1)/pi at 10 random points, max rel error %.2e", worst));
  std::vector<cd> Z{1.0, cd(0.3, 0.8)};
  auto fs = density_expansion_fit(1, "0", Z, {8, 16, 32, 64}, kPar);
  v.require(std::abs(fs.a0 - 1.0 / pi) < 1e-6, f("FS fit a0 = %.10f", fs.a0));
  auto pert = density_expansion_fit(1, kEps, Z, {8, 12, 16, 24}, kPar);
  v.require(std::abs(pert.a0 * pi - 1.0) < 0.02, f("perturbed fit a0 pi = %.5f", pert.a0 * pi));
  return v;
}

Verdict near_diagonal() {
  Verdict v;
  std::vector<cd> base{1.0, 0.0};
  auto rep = scaling_study(1, "0", base, ScalingGrid::defaults(1), {16, 32, 64, 128, 256}, kPar);
  v.require(rep.sup_error[2] < 0.15, f("sup error %.4f at N = 64", rep.sup_error[2]));
  v.require(strictly_decreasing(rep.sup_error),
            f("strictly decreasing over N = 16..256 (%.4f -> %.4f)", rep.sup_error.front(), rep.sup_error.back()));
  v.require(rep.slope <= -0.4, f("log-log slope %.3f", rep.slope));
  return v;
}

Verdict covariance_universality() {
  Verdict v;
  std::vector<std::vector<cd>> z{{0.0}, {1.0}};
  std::vector<cd> base{1.0, 0.0};
  auto series = scaling_convergence(1, "0", base, z, {32, 64, 128, 256}, kPar);
  std::vector<double> dev;
  for (const auto& r : series.reports) dev.push_back(r.max_dev);
  Eigen::MatrixXcd L = covariance_limit(z, 1).assembled();
  double scale = L.cwiseAbs().maxCoeff();
  v.require(dev.back() <= 0.05 * scale, f("max |Delta^N - Delta^inf| = %.4f vs 0.05 max entry = %.4f at N = 256",
                                          dev.back(), 0.05 * scale));
  v.require(strictly_decreasing(dev), f("decreasing over N = 32..256 (%.4f -> %.4f)", dev.front(), dev.back()));
  double worst = 0.0;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int m = 1; m <= 2; ++m)
    for (int n = 1; n <= 3; ++n) {
      std::vector<std::vector<cd>> zz(n, std::vector<cd>(m));
      for (auto& p : zz)
        for (auto& c : p) c = cd(g(rng), g(rng));
      worst = std::max(worst, (covariance_limit(zz, m).assembled() - oracle::oracle_limit(zz, m)).cwiseAbs().maxCoeff());
    }
  worst = std::max(worst, (L - oracle::oracle_limit(z, 1)).cwiseAbs().maxCoeff());
  v.require(worst <= 1e-10, f("Delta^inf vs differentiation oracle %.2e", worst));
  return v;
}

struct EmpiricalRuns {
  JPDReport sphere, gaussian;
};

EmpiricalRuns empirical_runs() {
  static EmpiricalRuns runs = [] {
    std::vector<std::vector<cd>> z{{0.0}, {1.0}};
    auto model = ProjectiveModel::make(1, 64);
    auto basis = build_basis(model, kPar);
    auto chart = HeisenbergChart::at_origin(model);
    KernelEvaluator K(basis, chart);
    return EmpiricalRuns{empirical_jpd(K, z, Ensemble::sphere, 20000, 101, kPar),
                         empirical_jpd(K, z, Ensemble::gaussian, 20000, 202, kPar)};
  }();
  return runs;
}

Verdict ensemble_equivalence() {
  Verdict v;
  auto r = empirical_runs();
  v.require(r.sphere.max_zscore <= 5.0, f("sphere: max |empirical - exact| / se = %.2f", r.sphere.max_zscore));
  v.require(r.gaussian.max_zscore <= 5.0, f("normalized Gaussian: %.2f", r.gaussian.max_zscore));
  return v;
}

double antihol_relative(const Eigen::MatrixXcd& M, int n, int m) {
  return CovarianceBlocks::from_assembled(M, n, m).antiholomorphic_max() / M.cwiseAbs().maxCoeff();
}

Verdict dbar_degeneracy() {
  Verdict v;
  double worst_exact = 0.0;
  for (int m = 1; m <= 2; ++m)
    for (const char* w : {"0", kEps}) {
      std::vector<std::vector<cd>> z(2, std::vector<cd>(m, 0.0));
      z[1][0] = 1.0;
      auto model = ProjectiveModel::make(m, m == 1 ? 64 : 8, w);
      auto basis = build_basis(model, kPar);
      std::vector<cd> base(m + 1, 0.0);
      base[0] = 1.0;
      base[1] = cd(0.2, 0.1);
      auto chart = HeisenbergChart::make(model, base);
      KernelEvaluator K(basis, chart);
      auto D = covariance_exact(K, scaled_points(z, model.N()));
      worst_exact = std::max(worst_exact, D.antiholomorphic_max() / D.assembled().cwiseAbs().maxCoeff());
    }
  v.require(worst_exact < 1e-8, f("exact Delta^N, m = 1, 2, FS and perturbed: %.2e", worst_exact));
  auto r = empirical_runs();
  double e = std::max(antihol_relative(r.sphere.empirical, 2, 1), antihol_relative(r.gaussian.empirical, 2, 1));
  v.require(e < 1e-8, f("empirical moment matrices: %.2e", e));
  return v;
}

Verdict measure_lemmas() {
  Verdict v;
  auto checks = measure_selftest(2024, kPar);
  const char* wanted[] = {"tail_law_d3",
                          "tail_law_d4",
                          "tail_law_d10",
                          "poincare_borel_ks",
                          "pushforward_covariance_exact",
                          "pushforward_covariance_mc",
                          "projection_density_mass",
                          "projection_density_archimedes"};
  for (const char* name : wanted) {
    auto it = std::find_if(checks.begin(), checks.end(), [&](const CheckResult& c) { return c.name == name; });
    if (it == checks.end()) v.require(false, std::string(name) + " missing");
    else v.require(it->pass, std::string(name) + ": " + it->detail);
  }
  return v;
}

Verdict tian() {
  Verdict v;
  double worst = 0.0;
  std::vector<std::vector<cd>> pts{{0.0}, {cd(0.5, 0.0)}, {cd(-0.3, 0.8)}, {cd(1.2, -0.4)}};
  auto fs = tian_study(1, "0", std::vector<cd>{1.0, 0.0}, pts, {1, 2, 4, 8, 16, 32, 64}, kPar);
  for (double e : fs.sup_error) worst = std::max(worst, e);
  v.require(worst < 1e-8, f("Fubini-Study error max %.2e over N = 1..64", worst));
  auto pert = tian_study(1, kEps, std::vector<cd>{1.0, 0.0}, pts, {16, 32, 64}, kPar);
  double r = std::max(pert.ratio[1], pert.ratio[2]);
  v.require(r <= 0.6, f("perturbed error(2N)/error(N) <= %.3f (errors %.2e -> %.2e)", r, pert.sup_error.front(),
                        pert.sup_error.back()));
  return v;
}

Verdict kodaira() {
  Verdict v;
  std::vector<double> ts;
  for (int i = 0; i <= 40; ++i) ts.push_back(i / 40.0);
  double f0 = 0.0, fmax = 0.0, excess = -1.0;
  for (int N : {16, 64}) {
    auto model = ProjectiveModel::make(1, N);
    auto basis = build_basis(model, kPar);
    auto chart = HeisenbergChart::at_origin(model);
    KernelEvaluator K(basis, chart);
    double sup_err = scaling_sup_error(K, ScalingGrid::defaults(1), kPar);
    for (double r = 0.5; r <= 3.0 + 1e-12; r += 0.25)
      for (double arg : {0.0, 1.1, 2.5}) {
        std::vector<cd> dir{std::polar(r, arg)};
        auto p = kodaira_separation_probe(K, dir, ts);
        f0 = std::max(f0, std::abs(p.f[0] - 1.0));
        for (std::size_t i = 0; i < ts.size(); ++i)
          if (ts[i] >= 0.2) fmax = std::max(fmax, p.f[i]);
        excess = std::max(excess, p.max_dev - sup_err);
      }
  }
  v.require(f0 <= 1e-15, f("|f_N(0) - 1| = %.1e", f0));
  v.require(fmax < 1.0 - 1e-6, f("max f_N(t) on t in [0.2, 1] = %.6f", fmax));
  v.require(excess <= 0.0, f("max over probes of (profile deviation - scaling error) = %.2e", excess));
  return v;
}

Verdict supnorm() {
  Verdict v;
  auto rep = supnorm_statistics({32, 64, 128, 256, 512}, Ensemble::sphere, 200, 2024, 1, kPar);
  bool refined = std::all_of(rep.refinement_ok.begin(), rep.refinement_ok.end(), [](bool b) { return b; });
  v.require(refined, "grid refinement changes below 2%");
  v.require(rep.spread(0) <= 1.5, f("median |s|_inf / sqrt(log N) max/min = %.3f", rep.spread(0)));
  v.require(rep.spread(1) <= 1.5, f("median |nabla s|_inf / sqrt(N log N) max/min = %.3f", rep.spread(1)));
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"dimension law", dimension_law},
      {"diagonal density", diagonal_density_check},
      {"near-diagonal universality", near_diagonal},
      {"covariance universality", covariance_universality},
      {"ensemble equivalence", ensemble_equivalence},
      {"dbar degeneracy", dbar_degeneracy},
      {"measure lemmas", measure_lemmas},
      {"Tian isometry", tian},
      {"Kodaira probe", kodaira},
      {"sup-norm growth", supnorm},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s criterion %2zu %-28s %.1fs  %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), s,
                v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
