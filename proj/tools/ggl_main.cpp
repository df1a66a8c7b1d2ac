#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ggl/errors.hpp"
#include "ggl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Graph-game solvers, NTM architectures and benchmarks"};
  std::string config_path;
  int threads = 0;
  bool paths = false;
  std::string output_dir;
  std::vector<std::string> overrides;
  app.add_option("config", config_path, "key=value experiment configuration")->required();
  app.add_option("--threads", threads, "worker threads for benchmark runs")->check(CLI::PositiveNumber);
  app.add_flag("--paths", paths, "also write paths.csv");
  app.add_option("-o,--output", output_dir, "output directory (overrides output.dir)");
  app.add_option("-s,--set", overrides, "extra key=value overrides");
  CLI11_PARSE(app, argc, argv);

  ggl::Config cfg;
  try {
    cfg = ggl::Config::load(config_path);
    if (threads > 0) cfg.set("threads", std::to_string(threads));
    if (paths) cfg.set("metrics.paths_csv", "true");
    if (!output_dir.empty()) cfg.set("output.dir", output_dir);
    for (const std::string& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ggl::ConfigError("override '" + kv + "' is not key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return ggl::exit_config;
  }
  return ggl::run(cfg, std::cout, std::cerr);
}
