#include "szlab/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "szlab/errors.hpp"
#include "szlab/global.hpp"
#include "szlab/jpd.hpp"
#include "szlab/kernel.hpp"
#include "szlab/quadrature.hpp"
#include "szlab/section_basis.hpp"

namespace szlab {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKinds{
    {ExperimentKind::basis, "basis"},
    {ExperimentKind::kernel_scaling, "kernel-scaling"},
    {ExperimentKind::jpd, "jpd"},
    {ExperimentKind::measures_selftest, "measures-selftest"},
    {ExperimentKind::tian, "tian"},
    {ExperimentKind::supnorm, "supnorm"},
    {ExperimentKind::kodaira_probe, "kodaira-probe"},
};

const std::set<std::string> kTopLevel{"kind",     "seed",    "model",  "base",   "points", "grid",    "ensemble",
                                      "samples",  "workers", "output", "probe",  "max_order"};

class Parser {
 public:
  std::vector<SchemaIssue> issues;

  void fail(const std::string& path, const std::string& msg, std::optional<std::size_t> pos = std::nullopt) {
    issues.push_back({path, msg, pos});
  }

  std::optional<cd> complex(const json& j, const std::string& path) {
    if (j.is_number()) return cd(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
      return cd(j[0].get<double>(), j[1].get<double>());
    fail(path, "expected a number or a [re, im] pair");
    return std::nullopt;
  }

  std::optional<std::vector<cd>> vector(const json& j, const std::string& path, std::size_t size) {
    if (!j.is_array() || j.size() != size) {
      fail(path, "expected an array of " + std::to_string(size) + " complex numbers");
      return std::nullopt;
    }
    std::vector<cd> out;
    bool ok = true;
    for (std::size_t i = 0; i < size; ++i) {
      auto c = complex(j[i], path + "[" + std::to_string(i) + "]");
      if (c) out.push_back(*c);
      else ok = false;
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<double> number(const json& j, const std::string& path, double lo, double hi) {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    double v = j.get<double>();
    if (!std::isfinite(v) || v < lo || v > hi) {
      std::ostringstream os;
      os << "must lie in [" << lo << ", " << hi << "]";
      fail(path, os.str());
      return std::nullopt;
    }
    return v;
  }

  std::optional<long long> integer(const json& j, const std::string& path, long long lo, long long hi) {
    if (!j.is_number_integer()) {
      fail(path, "expected an integer");
      return std::nullopt;
    }
    long long v = j.get<long long>();
    if (v < lo || v > hi) {
      fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return std::nullopt;
    }
    return v;
  }
};

bool needs_model(ExperimentKind k) { return k != ExperimentKind::measures_selftest; }

std::vector<std::vector<cd>> default_points(ExperimentKind k, int m) {
  std::vector<cd> o(m, 0.0), e(m, 0.0);
  e[0] = 1.0;
  if (k == ExperimentKind::jpd) return {o, e};
  std::vector<cd> a(m, cd(0.5, 0.0)), b(m, cd(-0.3, 0.8)), c(m, cd(1.2, -0.4));
  return {o, a, b, c};
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

json ValidationResult::to_json() const {
  json arr = json::array();
  for (const auto& i : issues) {
    json e{{"path", i.path}, {"message", i.message}};
    if (i.position) e["position"] = *i.position;
    arr.push_back(e);
  }
  return {{"valid", ok()}, {"errors", arr}};
}

ValidationResult validate_config(const json& j) {
  ValidationResult res;
  Parser p;
  ExperimentConfig c;
  c.source = j;
  if (!j.is_object()) {
    p.fail("", "config must be a JSON object");
    res.issues = p.issues;
    return res;
  }
  for (const auto& [key, _] : j.items())
    if (!kTopLevel.count(key)) p.fail(key, "unknown field");

  bool kind_ok = false;
  if (!j.contains("kind")) {
    p.fail("kind", "missing required field");
  } else if (!j["kind"].is_string()) {
    p.fail("kind", "expected a string");
  } else {
    std::string name = j["kind"].get<std::string>();
    for (const auto& [kind, n] : kKinds)
      if (n == name) {
        c.kind = kind;
        kind_ok = true;
      }
    if (!kind_ok)
      p.fail("kind", "unknown kind '" + name +
                         "' (basis, kernel-scaling, jpd, measures-selftest, tian, supnorm, kodaira-probe)");
  }

  if (!j.contains("seed")) p.fail("seed", "missing required field");
  else if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
    p.fail("seed", "expected a non-negative 64-bit integer");
  else c.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("workers"))
    if (auto w = p.integer(j["workers"], "workers", 0, 1024)) c.workers = static_cast<int>(*w);

  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) p.fail("output", "expected an object");
    else if (o.contains("dir")) {
      if (o["dir"].is_string() && !o["dir"].get<std::string>().empty()) c.out_dir = o["dir"].get<std::string>();
      else p.fail("output.dir", "expected a non-empty string");
    }
  }

  if (j.contains("ensemble")) {
    if (!j["ensemble"].is_string()) p.fail("ensemble", "expected a string");
    else {
      try {
        c.ensemble = parse_ensemble(j["ensemble"].get<std::string>());
      } catch (const std::exception&) {
        p.fail("ensemble", "unknown ensemble (sphere, gaussian, ball)");
      }
    }
  }

  if (j.contains("samples"))
    if (auto s = p.integer(j["samples"], "samples", 0, static_cast<long long>(1) << 40))
      c.samples = static_cast<std::size_t>(*s);

  if (!kind_ok) {
    res.issues = p.issues;
    return res;
  }

  // Model.
  bool model_ok = false;
  if (needs_model(c.kind)) {
    if (!j.contains("model") || !j["model"].is_object()) {
      p.fail("model", "missing required object");
    } else {
      const json& mj = j["model"];
      for (const auto& [key, _] : mj.items())
        if (key != "m" && key != "N" && key != "weight") p.fail("model." + key, "unknown field");
      bool m_ok = false;
      if (!mj.contains("m")) p.fail("model.m", "missing required field");
      else if (auto m = p.integer(mj["m"], "model.m", 1, 2)) {
        c.m = static_cast<int>(*m);
        m_ok = true;
      }
      bool N_ok = true;
      if (!mj.contains("N")) {
        p.fail("model.N", "missing required field");
        N_ok = false;
      } else if (mj["N"].is_number_integer()) {
        if (auto n = p.integer(mj["N"], "model.N", 1, 100000)) c.N = {static_cast<int>(*n)};
        else N_ok = false;
      } else if (mj["N"].is_array() && !mj["N"].empty()) {
        for (std::size_t i = 0; i < mj["N"].size(); ++i) {
          auto n = p.integer(mj["N"][i], "model.N[" + std::to_string(i) + "]", 1, 100000);
          if (!n) {
            N_ok = false;
            continue;
          }
          if (!c.N.empty() && *n <= c.N.back()) {
            p.fail("model.N[" + std::to_string(i) + "]", "N list must be strictly increasing");
            N_ok = false;
          }
          c.N.push_back(static_cast<int>(*n));
        }
      } else {
        p.fail("model.N", "expected a positive integer or a non-empty list");
        N_ok = false;
      }
      if (mj.contains("weight")) {
        if (mj["weight"].is_string()) c.weight = mj["weight"].get<std::string>();
        else p.fail("model.weight", "expected a string");
      }
      if (m_ok) {
        try {
          WeightExpr::parse(c.weight, c.m);
          // Bounds, continuity at infinity and positivity; N = 1 keeps it cheap.
          ProjectiveModel::make(c.m, 1, c.weight);
        } catch (const WeightParseError& e) {
          p.fail("model.weight", e.what(), e.position());
        } catch (const std::exception& e) {
          p.fail("model.weight", e.what());
        }
      }
      model_ok = m_ok && N_ok;
    }
  }

  const int m = c.m;
  if (model_ok) {
    c.base.assign(m + 1, 0.0);
    c.base[0] = 1.0;
    if (j.contains("base")) {
      if (auto b = p.vector(j["base"], "base", m + 1)) {
        double n2 = 0.0;
        for (cd x : *b) n2 += std::norm(x);
        if (n2 == 0.0) p.fail("base", "base point must be nonzero");
        else c.base = *b;
      }
    }
    c.points = default_points(c.kind, m);
    if (j.contains("points")) {
      const json& pj = j["points"];
      if (!pj.is_array() || pj.empty()) {
        p.fail("points", "expected a non-empty list of points");
      } else {
        c.points.clear();
        for (std::size_t i = 0; i < pj.size(); ++i)
          if (auto v = p.vector(pj[i], "points[" + std::to_string(i) + "]", m)) c.points.push_back(*v);
      }
    }
  }

  switch (c.kind) {
    case ExperimentKind::kernel_scaling: {
      if (model_ok && c.N.size() < 2) p.fail("model.N", "kernel-scaling needs at least two N values");
      if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) p.fail("grid", "expected an object");
        else {
          if (g.contains("radius"))
            if (auto r = p.number(g["radius"], "grid.radius", 1e-6, 10.0)) c.grid_radius = *r;
          if (g.contains("step"))
            if (auto s = p.number(g["step"], "grid.step", 1e-3, 10.0)) c.grid_step = *s;
          if (g.contains("angles")) {
            if (!g["angles"].is_array() || g["angles"].empty()) p.fail("grid.angles", "expected a non-empty list");
            else {
              c.grid_angles.clear();
              for (std::size_t i = 0; i < g["angles"].size(); ++i)
                if (auto a = p.number(g["angles"][i], "grid.angles[" + std::to_string(i) + "]", -100.0, 100.0))
                  c.grid_angles.push_back(*a);
            }
          }
        }
      }
      break;
    }
    case ExperimentKind::jpd:
      if (c.samples != 0 && c.samples < 1000) p.fail("samples", "jpd needs samples = 0 or samples >= 1000");
      break;
    case ExperimentKind::supnorm: {
      if (model_ok) {
        if (c.m != 1) p.fail("model.m", "supnorm supports m = 1 only");
        bool zero = false;
        try {
          zero = WeightExpr::parse(c.weight, 1).is_zero();
        } catch (const std::exception&) {
          zero = true;  // already reported above
        }
        if (!zero) p.fail("model.weight", "supnorm supports the Fubini-Study metric (weight \"0\") only");
        if (!c.N.empty() && c.N.front() < 2) p.fail("model.N", "supnorm needs N >= 2 (log N normalization)");
      }
      if (!j.contains("samples")) p.fail("samples", "missing required field");
      else if (c.samples < 1) p.fail("samples", "must be positive");
      if (j.contains("max_order"))
        if (auto k = p.integer(j["max_order"], "max_order", 0, 2)) c.max_order = static_cast<int>(*k);
      if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) p.fail("grid", "expected an object");
        else if (g.contains("constant"))
          if (auto h = p.number(g["constant"], "grid.constant", 1e-3, 1.0)) c.grid_constant = *h;
      }
      break;
    }
    case ExperimentKind::kodaira_probe: {
      c.probe_v.assign(m, 0.0);
      c.probe_v[0] = 1.0;
      for (int i = 0; i <= 20; ++i) c.probe_t.push_back(i / 20.0);
      if (j.contains("probe")) {
        const json& pr = j["probe"];
        if (!pr.is_object()) p.fail("probe", "expected an object");
        else {
          if (pr.contains("v"))
            if (auto v = p.vector(pr["v"], "probe.v", m)) c.probe_v = *v;
          if (pr.contains("t")) {
            if (!pr["t"].is_array() || pr["t"].empty()) p.fail("probe.t", "expected a non-empty list");
            else {
              c.probe_t.clear();
              for (std::size_t i = 0; i < pr["t"].size(); ++i)
                if (auto t = p.number(pr["t"][i], "probe.t[" + std::to_string(i) + "]", 0.0, 100.0))
                  c.probe_t.push_back(*t);
            }
          }
        }
      }
      double n2 = 0.0;
      for (cd x : c.probe_v) n2 += std::norm(x);
      if (n2 == 0.0) p.fail("probe.v", "direction must be nonzero");
      break;
    }
    default:
      break;
  }

  res.issues = p.issues;
  if (res.ok()) res.config = c;
  return res;
}

std::vector<CapIssue> check_caps(const ExperimentConfig& c) {
  std::vector<CapIssue> out;
  if (needs_model(c.kind))
    for (int N : c.N) {
      double d = static_cast<double>(section_dimension(c.m, N));
      if (d > static_cast<double>(kMaxSectionDimension)) {
        out.push_back({"d_N at N = " + std::to_string(N), d, static_cast<double>(kMaxSectionDimension)});
        break;
      }
    }
  if (c.samples > kMaxSamples)
    out.push_back({"samples", static_cast<double>(c.samples), static_cast<double>(kMaxSamples)});
  if (c.kind == ExperimentKind::jpd) {
    double comps = static_cast<double>(c.points.size()) * (2 * c.m + 1);
    if (comps > kMaxJetComponents) out.push_back({"jet components n(2m+1)", comps, kMaxJetComponents});
  }
  if (c.kind == ExperimentKind::kernel_scaling) {
    ScalingGrid g{c.grid_radius, c.grid_step, c.grid_angles};
    double P = static_cast<double>(g.points(c.m).size());
    double A = static_cast<double>(c.grid_angles.size());
    double work = P * P * A * A;
    if (work > kMaxGridWork) out.push_back({"kernel-scaling grid pairs x angle pairs", work, kMaxGridWork});
  }
  if (c.kind == ExperimentKind::supnorm && !c.N.empty()) {
    double work = 0.0;
    for (int N : c.N) {
      double h = c.grid_constant / std::sqrt(static_cast<double>(N));
      work += std::numbers::pi / (h * h) * (N + 1.0) * static_cast<double>(c.samples) * (1 + c.max_order);
    }
    if (work > kMaxGridWork) out.push_back({"supnorm grid points x d_N x samples", work, kMaxGridWork});
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char h[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(h, sizeof h, "%02x", md[i]);
    hex += h;
  }
  return hex;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir_);
    auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files.push_back(path);
  }
  void write(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  template <class F>
  void phase(const std::string& name, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      f();
    } catch (...) {
      record(name, t0);
      throw;
    }
    record(name, t0);
  }

  json phases = json::array();
  std::vector<std::filesystem::path> files;

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    phases.push_back({{"name", name}, {"seconds", s}});
  }
  std::filesystem::path dir_;
};

void run_basis(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  std::ostringstream csv;
  csv << "N,dimension,gram_max_deviation,diagonal_density\r\n";
  json reports = json::array();
  for (int N : c.N) {
    auto model = ProjectiveModel::make(c.m, N, c.weight);
    auto basis = build_basis(model, par);
    // Orthonormality on an independent, finer quadrature.
    auto grid = build_quadrature(model, 2 * N + 8);
    Eigen::MatrixXcd G = basis.gram(grid, par);
    double dev = (G - Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
    double rho = diagonal_density(basis, c.base);
    csv << N << ',' << basis.dimension() << ',' << fmt17(dev) << ',' << fmt17(rho) << "\r\n";
    json r = basis.dimension() <= 200 ? basis.to_json() : json{{"m", c.m}, {"N", N}, {"dimension", basis.dimension()}};
    r["gram_max_deviation"] = dev;
    r["diagonal_density"] = rho;
    reports.push_back(r);
  }
  run.write("basis.csv", csv.str());
  run.write("basis.json", reports);
}

void run_kernel_scaling(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  ScalingGrid grid{c.grid_radius, c.grid_step, c.grid_angles};
  auto rep = scaling_study(c.m, c.weight, c.base, grid, c.N, par);
  run.write("scaling.csv", rep.to_csv());
  run.write("scaling.json", rep.to_json(false));
}

void run_jpd(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  JPDSeries series;
  if (c.samples == 0) {
    series = scaling_convergence(c.m, c.weight, c.base, c.points, c.N, par);
  } else {
    std::ostringstream emp;
    emp << "N,max_zscore,kurtosis,kurtosis_se,antihol_max\r\n";
    for (int N : c.N) {
      auto model = ProjectiveModel::make(c.m, N, c.weight);
      auto basis = build_basis(model, par);
      auto chart = HeisenbergChart::make(model, c.base);
      KernelEvaluator K(basis, chart);
      auto r = empirical_jpd(K, c.points, c.ensemble, c.samples, derive_seed(c.seed, N), par);
      emp << N << ',' << fmt17(r.max_zscore) << ',' << fmt17(r.kurtosis) << ',' << fmt17(r.kurtosis_se) << ','
          << fmt17(r.antihol_max) << "\r\n";
      series.reports.push_back(std::move(r));
    }
    run.write("jpd_empirical.csv", emp.str());
  }
  run.write("jpd.csv", series.to_csv());
  run.write("jpd.json", series.to_json());
}

bool run_selftest(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  auto checks = measure_selftest(c.seed, par);
  std::ostringstream csv;
  csv << "check,pass,detail\r\n";
  json arr = json::array();
  bool all = true;
  for (const auto& k : checks) {
    std::string detail;
    for (char ch : k.detail) {
      if (ch == '"') detail += '"';
      detail += ch;
    }
    csv << k.name << ',' << (k.pass ? "pass" : "FAIL") << ",\"" << detail << "\"\r\n";
    arr.push_back({{"check", k.name}, {"pass", k.pass}, {"detail", k.detail}});
    all = all && k.pass;
  }
  run.write("selftest.csv", csv.str());
  run.write("selftest.json", json{{"all_pass", all}, {"checks", arr}});
  return all;
}

void run_tian(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  auto rep = tian_study(c.m, c.weight, c.base, c.points, c.N, par);
  run.write("tian.csv", rep.to_csv());
  run.write("tian.json", rep.to_json());
}

void run_supnorm(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  auto rep = supnorm_statistics(c.N, c.ensemble, c.samples, c.seed, c.max_order, par, c.grid_constant);
  run.write("supnorm.csv", rep.to_csv());
  run.write("supnorm.json", rep.to_json());
}

void run_kodaira(const ExperimentConfig& c, const Parallelism& par, Run& run) {
  std::ostringstream csv;
  csv << "N,t,f,gaussian\r\n";
  json arr = json::array();
  for (int N : c.N) {
    auto model = ProjectiveModel::make(c.m, N, c.weight);
    auto basis = build_basis(model, par);
    auto chart = HeisenbergChart::make(model, c.base);
    KernelEvaluator K(basis, chart);
    auto p = kodaira_separation_probe(K, c.probe_v, c.probe_t);
    for (std::size_t i = 0; i < p.t.size(); ++i)
      csv << N << ',' << fmt17(p.t[i]) << ',' << fmt17(p.f[i]) << ',' << fmt17(p.gaussian[i]) << "\r\n";
    arr.push_back(p.to_json());
  }
  run.write("kodaira.csv", csv.str());
  run.write("kodaira.json", arr);
}

}  // namespace

RunOutcome run_experiment(const json& config, const std::filesystem::path& out_dir,
                          std::optional<std::uint64_t> seed_override, int workers) {
  json cfg = config;
  if (seed_override && cfg.is_object()) cfg["seed"] = *seed_override;

  std::filesystem::path dir = out_dir;
  if (dir.empty()) {
    dir = "out";
    if (cfg.is_object() && cfg.contains("output") && cfg["output"].is_object() && cfg["output"].contains("dir") &&
        cfg["output"]["dir"].is_string())
      dir = cfg["output"]["dir"].get<std::string>();
  }

  Run run(dir);
  RunOutcome outcome;
  json error;
  auto wall0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  Parallelism par{1};

  try {
    std::optional<ExperimentConfig> conf;
    ValidationResult v;
    run.phase("validate", [&] { v = validate_config(cfg); });
    if (!v.ok()) {
      outcome.exit_code = kExitSchema;
      error = {{"category", "schema"}, {"message", "config failed validation"}, {"errors", v.to_json()["errors"]}};
    } else {
      conf = v.config;
      std::vector<CapIssue> caps;
      run.phase("caps", [&] { caps = check_caps(*conf); });
      if (!caps.empty()) {
        outcome.exit_code = kExitCap;
        json arr = json::array();
        for (const auto& k : caps) arr.push_back({{"what", k.what}, {"requested", k.requested}, {"limit", k.limit}});
        error = {{"category", "resource-cap"}, {"message", "resource cap exceeded"}, {"caps", arr}};
        conf.reset();
      }
    }
    if (conf) {
      par = Parallelism::resolve(workers > 0 ? workers : conf->workers);
      bool ok = true;
      run.phase("compute", [&] {
        switch (conf->kind) {
          case ExperimentKind::basis: run_basis(*conf, par, run); break;
          case ExperimentKind::kernel_scaling: run_kernel_scaling(*conf, par, run); break;
          case ExperimentKind::jpd: run_jpd(*conf, par, run); break;
          case ExperimentKind::measures_selftest: ok = run_selftest(*conf, par, run); break;
          case ExperimentKind::tian: run_tian(*conf, par, run); break;
          case ExperimentKind::supnorm: run_supnorm(*conf, par, run); break;
          case ExperimentKind::kodaira_probe: run_kodaira(*conf, par, run); break;
        }
      });
      if (!ok) {
        outcome.exit_code = kExitNumerical;
        error = {{"category", "check-failure"}, {"message", "one or more self-test checks failed"}};
      }
    }
  } catch (const ResourceCapError& e) {
    outcome.exit_code = kExitCap;
    error = {{"category", "resource-cap"}, {"message", e.what()}};
  } catch (const NumericalError& e) {
    outcome.exit_code = kExitNumerical;
    error = {{"category", "numerical"}, {"message", e.what()}};
  } catch (const DomainError& e) {
    outcome.exit_code = kExitSchema;
    error = {{"category", "domain"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    outcome.exit_code = kExitNumerical;
    error = {{"category", "internal"}, {"message", e.what()}};
  }

  json m;
  m["software"] = {{"name", kSoftwareName}, {"version", kSoftwareVersion}};
  m["config"] = cfg;
  m["started_utc"] = started;
  m["workers"] = par.workers;
  m["exit_code"] = outcome.exit_code;
  m["status"] = outcome.exit_code == kExitOk ? "ok" : "error";

  try {
    if (outcome.exit_code != kExitOk) {
      error["exit_code"] = outcome.exit_code;
      run.write("error.json", error);
      m["error"] = error;
    }
    json outs = json::array();
    for (const auto& f : run.files)
      outs.push_back({{"file", f.filename().string()},
                      {"bytes", std::filesystem::file_size(f)},
                      {"sha256", sha256_file(f)}});
    m["outputs"] = outs;
    m["phases"] = run.phases;
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "manifest.json", std::ios::binary) << m.dump(2) << "\n";
  } catch (const std::exception& e) {
    m["manifest_error"] = e.what();
  }
  outcome.manifest = m;
  outcome.files = run.files;
  return outcome;
}

}  // namespace szlab
