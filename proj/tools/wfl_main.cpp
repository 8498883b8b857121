#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wfl/config.hpp"
#include "wfl/errors.hpp"
#include "wfl/harness.hpp"
#include "wfl/selftest.hpp"

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir = "wfl-out";
  unsigned threads = 0;
  std::size_t snapshot_stride = 0;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON configuration file");
  sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  sub->add_option("--out-dir", o.out_dir, "output directory");
  sub->add_option("--threads", o.threads, "worker threads (fallback: WFL_THREADS)");
  sub->add_option("--snapshot-stride", o.snapshot_stride, "write field snapshots every n steps");
}

void print_report(const wfl::StudyReport& r) {
  for (const auto& v : r.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << r.kind << ": " << v.name << " = " << v.value << " (" << v.target
              << ", " << v.tolerance_key << " = " << v.tolerance << ")" << (v.detail.empty() ? "" : "; " + v.detail)
              << '\n';
  for (auto it = r.exclusions.begin(); it != r.exclusions.end(); ++it)
    std::cout << "excluded " << it.key() << ": " << it.value() << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability experiments for noisy Nagumo travelling fronts"};
  app.require_subcommand(1, 1);
  Options o;
  const char* names[] = {"simulate", "short-time", "long-time", "tails", "bounds"};
  for (const char* n : names) add_common(app.add_subcommand(n, std::string("run the ") + n + " study"), o);
  app.add_subcommand("selftest", "run the built-in identity checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();

  if (cmd == "selftest") {
    bool all = true;
    for (const auto& r : wfl::run_selftest()) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
      all = all && r.pass;
    }
    return all ? 0 : 1;
  }

  try {
    wfl::StudyConfig cfg = o.config.empty() ? wfl::default_config() : wfl::load_config(o.config);
    if (sub->count("--seed") > 0) cfg.sim.seed = o.seed;
    cfg.threads = wfl::resolve_threads(o.threads > 0 ? o.threads : cfg.threads);

    wfl::StudyReport rep;
    if (cmd == "simulate") rep = wfl::run_simulation(cfg, o.snapshot_stride);
    else if (cmd == "short-time") rep = wfl::run_short_time_study(cfg);
    else if (cmd == "long-time") rep = wfl::run_long_time_study(cfg);
    else if (cmd == "tails") rep = wfl::run_tails_study(cfg);
    else rep = wfl::run_bounds_study(cfg);

    rep.write(o.out_dir);
    print_report(rep);
    std::cout << "report: " << (std::filesystem::path(o.out_dir) / rep.kind / "report.json").string() << '\n';
    return rep.passed() ? 0 : 1;
  } catch (const wfl::ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
