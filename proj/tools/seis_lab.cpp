// Command-line driver: simulate, classify, sweep, eigen, ode.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "seis/commands.hpp"

namespace {

seis::Scenario load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw seis::Error("cannot read scenario file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return seis::parse_scenario(text.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-boundary SEIS simulator and analysis tools"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".";
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  long snapshot_every = -1;
  std::vector<std::string> axes;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--snapshot-every", snapshot_every, "Store field snapshots every k steps (0: none)")
        ->check(CLI::NonNegativeNumber);
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario and write its trajectory");
  CLI::App* classify = app.add_subcommand("classify", "Threshold report and observed regime");
  CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep over one or two axes");
  CLI::App* eigen = app.add_subcommand("eigen", "Leading eigenpairs and decay-rate check");
  CLI::App* ode = app.add_subcommand("ode", "Space-free baseline");
  for (CLI::App* sub : {simulate, classify, sweep, eigen, ode}) common(sub);
  sweep->add_option("--axis", axes, "key=start:stop:count (at most two)")->required()->expected(1, 2);

  CLI11_PARSE(app, argc, argv);

  try {
    seis::Scenario s = load(scenario_path);
    if (snapshot_every >= 0) s.solver.snapshot_every = static_cast<std::size_t>(snapshot_every);
    if (simulate->parsed()) return seis::cmd_simulate(s, out_dir, std::cerr);
    if (classify->parsed()) return seis::cmd_classify(s, out_dir, std::cerr);
    if (eigen->parsed()) return seis::cmd_eigen(s, out_dir, std::cerr);
    if (ode->parsed()) return seis::cmd_ode(s, out_dir, std::cerr);
    if (sweep->parsed()) {
      std::vector<seis::SweepAxis> parsed;
      for (const std::string& a : axes) parsed.push_back(seis::parse_axis(a));
      return seis::cmd_sweep(s, parsed, threads, out_dir, std::cerr);
    }
  } catch (const seis::ParseError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const seis::ValidationError& e) {
    std::cerr << "invalid scenario (" << e.field() << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
