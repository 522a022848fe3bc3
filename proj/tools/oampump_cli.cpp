// oampump <experiment> --config <path> --out <dir> [--seed <u64>]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oampump/oampump.h"

namespace {

int report(const std::string& code, int exit_code, const std::string& message) {
  const nlohmann::json err = {{"error", {{"code", code}, {"exit_code", exit_code}, {"message", message}}}};
  std::cerr << err.dump() << std::endl;
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological OAM pump simulator"};
  app.set_version_flag("--version", std::string(oampump_version()));
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  app.add_option("experiment", experiment, "bands | chern | pump | purity | disorder | iosim | geometry | plan")
      ->required();
  app.add_option("--config", config_path, "JSON config document")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  CLI::Option* seed_opt = app.add_option("--seed", seed, "RNG seed for stochastic experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", 2, e.what());
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) return report("config", 2, "cannot read config file '" + config_path + "'");
  std::ostringstream text;
  text << in.rdbuf();

  std::vector<char> summary(1 << 24);
  const oampump_status s = oampump_run_experiment(experiment.c_str(), text.str().c_str(), out_dir.c_str(),
                                                  seed_opt->count() ? &seed : nullptr, summary.data(),
                                                  summary.size());
  if (s != OAMPUMP_OK) {
    std::cerr << summary.data() << std::endl;
    return oampump_exit_code(s);
  }
  std::cout << summary.data() << std::endl;
  return 0;
}
