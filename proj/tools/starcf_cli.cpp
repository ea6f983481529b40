// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run, sweep, validate, emit-profiles.
// Exit codes: 0 success, 2 validation failure, 1 any other error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "starcf/experiment.hpp"

namespace {

using namespace starcf;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) out += (i ? " " : "") + std::string(argv[i]);
  return out;
}

SystemConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  SystemConfig cfg = load_config(path);
  for (const auto& s : sets) apply_override(cfg, s);
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

void print_summary(const std::vector<ResultRow>& rows) {
  std::printf("%-14s %-10s %-16s %12s %12s\n", "param", "value", "scheme", "sum_se", "stderr");
  for (const auto& r : rows) {
    if (r.user != "sum") continue;
    std::string scheme = "L" + std::to_string(r.level) + "-" + r.combiner;
    if (r.level == 1) scheme += "-" + r.decoder;
    std::printf("%-14s %-10s %-16s %12.6f %12.6f\n", r.sweep_param.c_str(), r.sweep_value.c_str(),
                scheme.c_str(), r.se_mean, r.se_stderr);
  }
}

void emit_results(const std::vector<ResultRow>& rows, const SystemConfig& cfg, const std::string& out_dir,
                  const std::string& cmd, double seconds) {
  const std::filesystem::path dir(out_dir);
  write_csv(rows, (dir / "results.csv").string());
  write_manifest(cfg, cmd, seconds, (dir / "manifest.json").string());
  write_curves(rows, (dir / "curves").string());
  std::printf("wrote %s\n", (dir / "results.csv").string().c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR-RIS cell-free massive MIMO uplink SE simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir = "results", param, values;
  std::vector<std::string> sets;
  long trials = 0;
  int setup = 0;

  auto* run = app.add_subcommand("run", "evaluate every configured scheme at one point");
  run->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "override key=value (repeatable)");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "sweep one parameter over a value list");
  sweep->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "N_u, K, M, N_ap, L, kappa_ap, kappa_u, direct_blocked or ris_mode")
      ->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--set", sets, "override key=value (repeatable)");
  sweep->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* val = app.add_subcommand("validate", "compare the closed form with Monte Carlo under MR combining");
  val->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  val->add_option("--trials", trials, "Monte Carlo trials (default: config n_trials)");
  val->add_option("--setup", setup, "setup index")->capture_default_str();
  val->add_option("--set", sets, "override key=value (repeatable)");

  auto* emit = app.add_subcommand("emit-profiles", "write the built-in profiles as INI files");
  emit->add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  const std::string cmd = command_line(argc, argv);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (*run) {
      const SystemConfig cfg = load_with_overrides(config_path, sets);
      const auto rows = to_rows(run_point(cfg), "none", "-");
      print_summary(rows);
      emit_results(rows, cfg, out_dir, cmd, seconds_since(t0));
    } else if (*sweep) {
      const SystemConfig cfg = load_with_overrides(config_path, sets);
      const auto rows = run_sweep(cfg, param, split_values(values));
      print_summary(rows);
      emit_results(rows, cfg, out_dir, cmd, seconds_since(t0));
    } else if (*val) {
      const SystemConfig cfg = load_with_overrides(config_path, sets);
      const long n = trials > 0 ? trials : cfg.n_trials;
      const ValidationReport rep = validate(cfg, n, setup);
      std::printf("setup %d, %ld trials\n", rep.setup_index, rep.n_trials);
      std::printf("%-8s %4s %14s %14s %12s %10s\n", "decoder", "user", "closed", "mc", "abs_gap", "rel_gap");
      for (const auto& g : rep.gaps)
        std::printf("%-8s %4d %14.8g %14.8g %12.4g %10.4g\n", to_string(g.decoder).c_str(), g.user, g.closed,
                    g.mc, g.abs_gap, g.rel_gap);
      for (const auto& m : rep.moments) std::printf("moment %-10s max_z %.3f\n", m.name.c_str(), m.max_z);
      std::printf("max_rel_gap %.4g (limit %.2g), max_z %.3f (limit %.1f): %s\n", rep.max_rel_gap, kMaxRelGap,
                  rep.max_z, kMaxZ, rep.pass ? "PASS" : "FAIL");
      return rep.pass ? kExitOk : kExitValidation;
    } else if (*emit) {
      std::filesystem::create_directories(out_dir);
      for (const auto& [name, cfg] : builtin_profiles()) {
        const auto path = std::filesystem::path(out_dir) / (name + ".ini");
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
        f << to_ini(cfg);
        std::printf("wrote %s\n", path.string().c_str());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitOk;
}
