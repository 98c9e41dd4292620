#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "oncovir/integrator.hpp"
#include "oncovir/runner.hpp"

namespace oncovir {

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

int run_many(const RunConfig& cfg, const std::vector<const Scenario*>& todo, const std::filesystem::path& out,
             unsigned threads) {
  std::atomic<std::size_t> next{0};
  std::mutex io;
  int status = 0;
  auto worker = [&] {
    for (std::size_t k = next++; k < todo.size(); k = next++) {
      const Scenario& sc = *todo[k];
      int code = 0;
      std::string message;
      try {
        const auto files = run_scenario(cfg, sc, out);
        message = "ok      " + sc.name + " (" + std::to_string(files.size()) + " files)";
      } catch (const ConfigError& e) {
        code = kConfigError;
        message = std::string("config  ") + e.what();
      } catch (const NumericError& e) {
        code = kNumericError;
        message = std::string("numeric ") + e.what();
      } catch (const std::exception& e) {
        code = 1;
        message = std::string("error   ") + sc.name + ": " + e.what();
      }
      std::lock_guard lock(io);
      (code ? std::cerr : std::cout) << message << "\n";
      if (code && (status == 0 || code < status)) status = code;
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(todo.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return status;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Tumour/oncolytic-virus model laboratory"};
  app.require_subcommand(1);

  std::string config_path, scenario, out_dir = "out";
  bool all = false, seedless = false;
  unsigned threads = 1;
  auto* run = app.add_subcommand("run", "Run one scenario, or all of them");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("scenario", scenario, "Scenario name");
  run->add_flag("--all", all, "Run every scenario in the file");
  run->add_option("--out", out_dir, "Output directory (one subdirectory per scenario)");
  run->add_option("--threads", threads, "Scenarios to run concurrently")->check(CLI::PositiveNumber);
  run->add_flag("--seedless", seedless, "Accepted for scripts; all computations are deterministic");

  std::string list_path;
  auto* list = app.add_subcommand("list", "List the scenarios of a configuration file");
  list->add_option("config", list_path, "Configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*list) {
      std::cout << list_scenarios(load_config(list_path));
      return 0;
    }
    const RunConfig cfg = load_config(config_path);
    std::vector<const Scenario*> todo;
    if (all == !scenario.empty()) throw ConfigError("give exactly one of a scenario name or --all");
    if (all) {
      for (const auto& s : cfg.scenarios) todo.push_back(&s);
    } else {
      const Scenario* s = cfg.find(scenario);
      if (!s) throw ConfigError("unknown scenario '" + scenario + "' in " + config_path);
      todo.push_back(s);
    }
    return run_many(cfg, todo, out_dir, threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace oncovir
