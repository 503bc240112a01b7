#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "szlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"szlab: Szego kernel laboratory on CP^1 and CP^2"};
  std::string config_path, out_dir;
  bool validate_only = false;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Experiment config (JSON)")->required();
  app.add_flag("--validate", validate_only, "Check the config against the schema and exit");
  app.add_option("--workers", workers, "Worker threads (default: config, then SZLAB_WORKERS, then 1)")
      ->check(CLI::Range(0, 1024));
  app.add_option("--out", out_dir, "Output directory (default: config output.dir, then ./out)");
  app.add_option("--seed", seed, "Root seed, overrides the config");
  app.set_version_flag("--version", std::string(szlab::kSoftwareVersion));
  CLI11_PARSE(app, argc, argv);

  nlohmann::json cfg;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open " << config_path << "\n";
      return szlab::kExitSchema;
    }
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      nlohmann::json err{{"valid", false},
                         {"errors", {{{"path", ""}, {"message", e.what()}, {"position", e.byte}}}}};
      std::cout << err.dump(2) << "\n";
      return szlab::kExitSchema;
    }
  }
  if (seed && cfg.is_object()) cfg["seed"] = *seed;

  if (validate_only) {
    auto v = szlab::validate_config(cfg);
    std::cout << v.to_json().dump(2) << "\n";
    return v.ok() ? szlab::kExitOk : szlab::kExitSchema;
  }

  auto outcome = szlab::run_experiment(cfg, out_dir, seed, workers);
  const auto& m = outcome.manifest;
  std::cout << "status: " << m.value("status", "?") << " (exit " << outcome.exit_code << ")\n";
  for (const auto& f : outcome.files) std::cout << "  wrote " << f.string() << "\n";
  if (m.contains("error")) std::cerr << m["error"].dump(2) << "\n";
  return outcome.exit_code;
}
