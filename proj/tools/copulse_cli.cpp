#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "copulse/errors.hpp"
#include "copulse/experiments.hpp"
#include "copulse/io.hpp"

namespace {

namespace fs = std::filesystem;
using copulse::ConfigError;
using nlohmann::json;

json read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }
}

struct GlobalOpts {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

json effective_config(const GlobalOpts& g, const std::string& default_preset) {
  json raw = g.config.empty() ? copulse::experiments::preset_json(default_preset)
                              : read_config(g.config);
  if (g.seed_set) {
    if (!raw.contains("scenario") || !raw["scenario"].is_object()) raw["scenario"] = json::object();
    raw["scenario"]["seed"] = g.seed;
  }
  return raw;
}

int run_verb(const std::string& verb, const json& raw, const GlobalOpts& g) {
  namespace ex = copulse::experiments;
  const ex::ExperimentConfig cfg = ex::config_from_json(raw);
  const int threads =
      g.threads > 0 ? g.threads : std::max(1u, std::thread::hardware_concurrency());
  const fs::path out(g.out);
  fs::create_directories(out);

  std::vector<std::string> outputs;
  if (verb == "spectrum") {
    const auto r = ex::run_spectrum(cfg, threads);
    outputs = ex::emit_spectrum(r, out);
    for (const auto& m : r.methods)
      std::cout << m.method << " ridges: " << m.ridges << "\n";
  } else if (verb == "rank-table") {
    const auto r = ex::run_rank_table(cfg, threads);
    outputs = ex::emit_rank_table(r, out);
    std::cout << "rank table: " << r.rows.size() << " cells\n";
  } else if (verb == "sinr") {
    const auto r = ex::run_sinr(cfg, threads);
    outputs = ex::emit_sinr(r, out);
    std::cout << "gap coarray-physical: " << copulse::io::num(r.gap_physical_db)
              << " dB, coarray-dpss: " << copulse::io::num(r.gap_dpss_db) << " dB\n";
  } else if (verb == "reject") {
    const auto r = ex::run_reject(cfg, threads);
    outputs = ex::emit_reject(r, out);
    std::cout << "in-region drop: " << copulse::io::num(r.drop_db) << " dB\n";
  } else if (verb == "bench") {
    const auto r = ex::run_bench(cfg, threads);
    outputs = ex::emit_bench(r, out);
    for (const auto& e : r.entries)
      std::cout << "pair (" << e.sensor_pair.m_small << "," << e.sensor_pair.n_large
                << "): counted/formula = " << copulse::io::num(e.counted_over_formula) << "\n";
  } else {
    throw ConfigError("unknown verb: " + verb);
  }

  const json man = copulse::io::manifest(verb, raw, cfg.scenario.seed, outputs);
  copulse::io::write_json(out / "manifest.json", man);
  std::cout << "wrote " << outputs.size() + 1 << " files to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co-pulsing FDA coarray STAP experiments"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config, "JSON config file (omit to use the verb's preset)");
  app.add_option("--out", g.out, "output directory (created if missing)");
  auto* seed_opt = app.add_option("--seed", g.seed, "override scenario.seed");
  app.add_option("--threads", g.threads, "worker threads (default: hardware concurrency)");

  auto* spectrum = app.add_subcommand("spectrum", "clutter spectra and ridge counts");
  auto* rank_table = app.add_subcommand("rank-table", "predicted vs empirical clutter rank sweep");
  auto* sinr = app.add_subcommand("sinr", "output-SINR Doppler sweep, three methods");
  auto* reject = app.add_subcommand("reject", "interference rejection demo");
  auto* bench = app.add_subcommand("bench", "flop-count and wall-time comparison");
  for (auto* sub : {spectrum, rank_table, sinr, reject, bench}) sub->fallthrough();

  std::vector<double> region_center, region_widths;
  reject->add_option("--region-center", region_center, "override interference center: f_T f_d f_R")
      ->expected(3);
  reject->add_option("--region-widths", region_widths, "override interference widths")
      ->expected(3);

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    std::string verb;
    std::string preset;
    if (spectrum->parsed()) {
      verb = "spectrum";
      preset = "spectrum-np6";
    } else if (rank_table->parsed()) {
      verb = "rank-table";
      preset = "rank-table";
    } else if (sinr->parsed()) {
      verb = "sinr";
      preset = "sinr";
    } else if (reject->parsed()) {
      verb = "reject";
      preset = "reject";
    } else if (bench->parsed()) {
      verb = "bench";
      preset = "bench";
    }

    json raw = effective_config(g, preset);
    if (!region_center.empty() || !region_widths.empty()) {
      if (!raw.contains("scenario") || !raw["scenario"].is_object() ||
          !raw["scenario"].contains("interference"))
        throw ConfigError("region overrides need scenario.interference in the config");
      if (!region_center.empty())
        raw["scenario"]["interference"]["center"] = region_center;
      if (!region_widths.empty())
        raw["scenario"]["interference"]["widths"] = region_widths;
    }
    return run_verb(verb, raw, g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const copulse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
