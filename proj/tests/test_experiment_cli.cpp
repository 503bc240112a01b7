#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "szlab/experiment.hpp"

using namespace szlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("szlab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_issue(const ValidationResult& v, const std::string& path) {
  for (const auto& i : v.issues)
    if (i.path == path) return true;
  return false;
}

std::vector<double> column(const std::string& csv, int col) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i <= col; ++i) std::getline(ls, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

}  // namespace

TEST_CASE("validation lists schema errors without running") {
  SUBCASE("missing seed") {
    auto v = validate_config(json::parse(R"({"kind":"tian","model":{"m":1,"N":[4,8]}})"));
    CHECK_FALSE(v.ok());
    CHECK(has_issue(v, "seed"));
    CHECK(v.issues.size() == 1);
  }
  SUBCASE("non-increasing N list") {
    auto v = validate_config(json::parse(R"({"kind":"tian","seed":1,"model":{"m":1,"N":[8,8,16]}})"));
    CHECK(has_issue(v, "model.N[1]"));
  }
  SUBCASE("weight grammar error carries its position") {
    auto v = validate_config(json::parse(R"({"kind":"tian","seed":1,"model":{"m":1,"N":4,"weight":"0.1*r2 $ 2"}})"));
    REQUIRE(v.issues.size() == 1);
    CHECK(v.issues[0].path == "model.weight");
    REQUIRE(v.issues[0].position.has_value());
    CHECK(*v.issues[0].position == 7);
    CHECK(v.to_json()["errors"][0]["position"] == 7);
  }
  SUBCASE("weight variables outside the dimension") {
    auto v = validate_config(json::parse(R"({"kind":"tian","seed":1,"model":{"m":1,"N":4,"weight":"x2"}})"));
    CHECK(has_issue(v, "model.weight"));
  }
  SUBCASE("several errors at once") {
    auto v = validate_config(json::parse(
        R"({"kind":"supnorm","bogus":1,"model":{"m":2,"N":[1]},"samples":0,"max_order":5,"ensemble":"cauchy"})"));
    for (const char* p : {"bogus", "seed", "model.m", "samples", "max_order", "ensemble"}) CHECK(has_issue(v, p));
  }
  SUBCASE("unknown kind and non-object input") {
    CHECK(has_issue(validate_config(json::parse(R"({"kind":"plot","seed":1})")), "kind"));
    CHECK_FALSE(validate_config(json::array()).ok());
  }
  SUBCASE("a valid config fills defaults") {
    auto v = validate_config(json::parse(R"({"kind":"jpd","seed":3,"model":{"m":1,"N":[32,64]}})"));
    REQUIRE(v.ok());
    CHECK(v.config->points.size() == 2);
    CHECK(v.config->base.size() == 2);
    CHECK(v.config->N == std::vector<int>{32, 64});
  }
  SUBCASE("complex numbers as pairs") {
    auto v = validate_config(
        json::parse(R"({"kind":"kodaira-probe","seed":3,"model":{"m":2,"N":8},"probe":{"v":[[1,1],0.5],"t":[0,0.5]}})"));
    REQUIRE(v.ok());
    CHECK(v.config->probe_v[0] == cd(1, 1));
    CHECK(v.config->probe_t.size() == 2);
  }
}

TEST_CASE("resource caps fail fast") {
  auto c = validate_config(json::parse(R"({"kind":"basis","seed":1,"model":{"m":2,"N":[4,100]}})"));
  REQUIRE(c.ok());
  auto caps = check_caps(*c.config);
  REQUIRE(caps.size() == 1);
  CHECK(caps[0].requested == 5151.0);

  auto dir = scratch("cap");
  auto out = run_experiment(c.config->source, dir);
  CHECK(out.exit_code == kExitCap);
  CHECK(out.files.size() == 1);
  CHECK(fs::exists(dir / "error.json"));
  auto m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["status"] == "error");
  CHECK(m["error"]["category"] == "resource-cap");
  // No compute phase was entered.
  for (const auto& p : m["phases"]) CHECK(p["name"] != "compute");

  auto j = json::parse(R"({"kind":"jpd","seed":1,"model":{"m":2,"N":8},"points":[]})");
  j["points"] = json::array();
  for (int i = 0; i < 41; ++i) j["points"].push_back({i * 0.5, 0});
  auto v = validate_config(j);
  REQUIRE(v.ok());
  CHECK(check_caps(*v.config).size() == 1);

  auto s = validate_config(
      json::parse(R"({"kind":"supnorm","seed":1,"model":{"m":1,"N":[512,1024]},"samples":20000000,"max_order":2})"));
  REQUIRE(s.ok());
  CHECK(check_caps(*s.config).size() == 2);  // samples and grid work
}

TEST_CASE("schema and numerical failures produce error records") {
  auto dir = scratch("schema");
  auto out = run_experiment(json::parse(R"({"kind":"tian","model":{"m":1,"N":[4]}})"), dir);
  CHECK(out.exit_code == kExitSchema);
  auto err = json::parse(slurp(dir / "error.json"));
  CHECK(err["category"] == "schema");
  CHECK(err["errors"][0]["path"] == "seed");
  CHECK(json::parse(slurp(dir / "manifest.json"))["exit_code"] == 2);

  auto dir2 = scratch("domain");
  auto out2 = run_experiment(
      json::parse(R"({"kind":"jpd","seed":1,"model":{"m":1,"N":[16]},"points":[[0],[0]]})"), dir2);
  CHECK(out2.exit_code == kExitSchema);
  CHECK(json::parse(slurp(dir2 / "error.json"))["category"] == "domain");
}

TEST_CASE("measures self-test run") {
  auto dir = scratch("selftest");
  auto out = run_experiment(json::parse(R"({"kind":"measures-selftest","seed":11})"), dir);
  CHECK(out.exit_code == kExitOk);
  auto s = json::parse(slurp(dir / "selftest.json"));
  CHECK(s["all_pass"] == true);
  CHECK(s["checks"].size() >= 20);
  std::string csv = slurp(dir / "selftest.csv");
  CHECK(csv.rfind("check,pass,detail\r\n", 0) == 0);
  CHECK(csv.find(",FAIL,") == std::string::npos);
}

TEST_CASE("kernel-scaling run reports a strictly decreasing sup error") {
  auto dir = scratch("scaling");
  auto out = run_experiment(
      json::parse(R"({"kind":"kernel-scaling","seed":1,"model":{"m":1,"N":[16,32,64,128,256],"weight":"0"}})"), dir);
  REQUIRE(out.exit_code == kExitOk);
  auto e = column(slurp(dir / "scaling.csv"), 1);
  REQUIRE(e.size() == 5);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] < e[i - 1]);
}

TEST_CASE("jpd run with samples") {
  auto dir = scratch("jpd");
  auto out = run_experiment(json::parse(R"({"kind":"jpd","seed":5,"model":{"m":1,"N":[32,64,128,256]},
      "points":[[0],[1]],"ensemble":"sphere","samples":20000})"),
                            dir);
  REQUIRE(out.exit_code == kExitOk);
  auto dev = column(slurp(dir / "jpd.csv"), 1);
  REQUIRE(dev.size() == 4);
  for (std::size_t i = 1; i < dev.size(); ++i) CHECK(dev[i] < dev[i - 1]);
  auto z = column(slurp(dir / "jpd_empirical.csv"), 1);
  for (double v : z) CHECK(v < 5.0);
}

TEST_CASE("runs are reproducible and the manifest digests the outputs") {
  const char* cfg =
      R"({"kind":"supnorm","seed":21,"model":{"m":1,"N":[8,16]},"samples":20,"max_order":2,"ensemble":"gaussian"})";
  auto a = scratch("rep_a"), b = scratch("rep_b"), c = scratch("rep_c"), d = scratch("rep_d");
  REQUIRE(run_experiment(json::parse(cfg), a, std::nullopt, 1).exit_code == 0);
  REQUIRE(run_experiment(json::parse(cfg), b, std::nullopt, 1).exit_code == 0);
  REQUIRE(run_experiment(json::parse(cfg), c, std::nullopt, 3).exit_code == 0);
  REQUIRE(run_experiment(json::parse(cfg), d, std::uint64_t{22}, 1).exit_code == 0);
  CHECK(slurp(a / "supnorm.csv") == slurp(b / "supnorm.csv"));
  CHECK(slurp(a / "supnorm.json") == slurp(b / "supnorm.json"));
  CHECK(slurp(a / "supnorm.csv") == slurp(c / "supnorm.csv"));
  CHECK(slurp(a / "supnorm.csv") != slurp(d / "supnorm.csv"));

  auto m = json::parse(slurp(a / "manifest.json"));
  CHECK(m["software"]["version"] == kSoftwareVersion);
  CHECK(m["config"]["seed"] == 21);
  CHECK(json::parse(slurp(d / "manifest.json"))["config"]["seed"] == 22);
  bool found = false;
  for (const auto& o : m["outputs"])
    if (o["file"] == "supnorm.csv") {
      found = true;
      CHECK(o["sha256"] == sha256_file(a / "supnorm.csv"));
      CHECK(o["bytes"] == fs::file_size(a / "supnorm.csv"));
    }
  CHECK(found);
  std::vector<std::string> names;
  for (const auto& p : m["phases"]) names.push_back(p["name"]);
  CHECK(names == std::vector<std::string>{"validate", "caps", "compute"});

  // CSV dialect: CRLF line ends, 17 significant digits.
  std::string csv = slurp(a / "supnorm.csv");
  CHECK(csv.find("\r\n") != std::string::npos);
  CHECK(csv.find("e-01") != std::string::npos);
}

TEST_CASE("remaining kinds run") {
  for (const char* cfg : {
           R"j({"kind":"basis","seed":1,"model":{"m":2,"N":[2,4],"weight":"0.1*(x1^2+y1^2)/(1+r2)"}})j",
           R"j({"kind":"tian","seed":1,"model":{"m":1,"N":[8,16],"weight":"0.1*r2/(1+r2)"}})j",
           R"({"kind":"kodaira-probe","seed":1,"model":{"m":1,"N":[16,64]},"probe":{"v":[2.0]}})",
       }) {
    auto dir = scratch("kinds");
    auto out = run_experiment(json::parse(cfg), dir);
    CHECK_MESSAGE(out.exit_code == kExitOk, cfg);
    CHECK(out.files.size() == 2);
  }
  auto dir = scratch("basis");
  run_experiment(json::parse(R"({"kind":"basis","seed":1,"model":{"m":1,"N":[3,10]},"base":[1,[0.5,0.5]]})"), dir);
  auto dims = column(slurp(dir / "basis.csv"), 1);
  CHECK(dims == std::vector<double>{4, 11});
  for (double g : column(slurp(dir / "basis.csv"), 2)) CHECK(g < 1e-9);
}

TEST_CASE("sha256 of a known string") {
  auto p = fs::temp_directory_path() / "szlab_sha_abc";
  std::ofstream(p, std::ios::binary) << "abc";
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
