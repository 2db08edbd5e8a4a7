#include <chrono>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "acm/commands.hpp"

namespace {

constexpr int EXIT_VERIFY = 1;
constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_NUMERIC = 3;

int execute(acm::RunConfig cfg, const std::string& out_dir, const acm::CommandOptions& opt) {
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  for (const auto& w : cfg.params.regime_warnings()) std::cerr << "warning: " << w << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  const acm::CommandOutput out = acm::run_command(cfg, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& f : out.files) std::cout << "wrote " << f << "\n";
  if (cfg.run == "verify") {
    for (const auto& c : out.summary["checks"])
      std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
                << "  observed=" << c["observed"].dump() << " tol=" << c["tolerance"].dump() << "\n";
  }
  std::cerr << cfg.run << " finished in " << secs << " s\n";
  return out.passed ? 0 : EXIT_VERIFY;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-model simulator for a driven two-level atom"};
  app.fallthrough();
  std::string config_path, out_dir;
  bool svg = true;
  unsigned threads = 0;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_flag("--svg,!--no-svg", svg, "write SVG charts next to the CSV files");
  app.add_option("--threads", threads, "worker threads for sweeps (0 = hardware)");

  std::string chosen;
  for (const char* name : {"simulate", "steady", "spectrum", "sweep", "verify"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " command");
    sub->callback([&chosen, name] { chosen = name; });
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : EXIT_CONFIG;
  }

  try {
    acm::RunConfig cfg;
    if (!config_path.empty()) cfg = acm::load_config(config_path);
    if (!chosen.empty()) cfg.run = chosen;
    cfg.validate();
    return execute(cfg, out_dir, {svg, threads});
  } catch (const acm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return EXIT_CONFIG;
  } catch (const acm::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return EXIT_CONFIG;
  } catch (const acm::NumericalDegradation& e) {
    std::cerr << "numerical degradation: " << e.what() << "\n";
    return EXIT_NUMERIC;
  } catch (const acm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_NUMERIC;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_CONFIG;
  }
}
