// Command-line front end: one subcommand per pipeline stage plus `synth`.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "macroregime/csv.hpp"
#include "macroregime/pipeline.hpp"
#include "macroregime/synth.hpp"

namespace fs = std::filesystem;
using namespace macroregime;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  bool resume = false;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "run directory (default runs/run-<timestamp>)");
  cmd->add_flag("--resume", f.resume, "reuse stage outputs whose inputs are unchanged");
  cmd->add_option("--seed", f.seed, "override every seed in the config");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

int run_stage(const CommonFlags& f, Stage last) {
  RunOptions opt;
  opt.out = f.out;
  opt.resume = f.resume;
  opt.seed = f.seed;
  opt.threads = f.threads;
  opt.last_stage = last;
  const auto result = run_pipeline(load_config(f.config), opt);
  for (const auto& w : result.diagnostics.warnings()) std::cerr << "warning: " << w << '\n';
  std::cout << "run directory: " << result.dir.string() << '\n';
  for (const auto& s : result.stages_run) std::cout << "  computed " << s << '\n';
  for (const auto& s : result.stages_cached) std::cout << "  cached   " << s << '\n';
  return 0;
}

struct SynthFlags {
  std::string kind = "regimes";
  std::string out = "synthetic";
  std::uint64_t seed = 0;
  std::size_t regimes = 3;
  std::size_t assets = 20;
  std::size_t rows_per_regime = 500;
  std::size_t clusters = 2;
  std::size_t cluster_size = 5;
  std::size_t lag = 5;
  double coupling = 0.8;
  double noise = 0.2;
  std::size_t rows = 1000;
};

int synth(const SynthFlags& f) {
  const fs::path dir = f.out;
  ReturnsPanel panel;
  nlohmann::json config = {{"data", {{"levels_path", "levels.csv"}, {"meta_path", "meta.csv"}}}};
  auto truth = csv::open_output(dir / "truth.csv");
  if (f.kind == "regimes") {
    const auto specs = random_block_specs(f.regimes, f.assets, f.seed);
    auto s = planted_regime_panel(f.rows_per_regime, specs, f.seed);
    panel = std::move(s.panel);
    truth << "date,regime_id\n";
    for (std::size_t t = 0; t < panel.rows(); ++t) truth << panel.dates[t].to_string() << ',' << s.row_truth[t] << '\n';
    config["window"] = {{"length", 2 * f.assets}, {"stride", std::max<std::size_t>(1, f.rows_per_regime / 25)}};
  } else if (f.kind == "leadlag") {
    PlantedLeadLagSpec spec;
    spec.cluster_sizes.assign(f.clusters, f.cluster_size);
    spec.lag = f.lag;
    spec.coupling = f.coupling;
    spec.noise = f.noise;
    spec.rows = f.rows;
    spec.seed = f.seed;
    auto s = planted_leadlag_panel(spec);
    panel = std::move(s.panel);
    truth << "asset_id,cluster\n";
    for (std::size_t j = 0; j < panel.cols(); ++j) truth << panel.assets[j].id << ',' << s.cluster_of_asset[j] << '\n';
    config["kmeans"] = {{"k", 2}};
  } else {
    throw ParseError("synth: --kind must be 'regimes' or 'leadlag'");
  }
  write_levels_csv(dir / "levels.csv", levels_from_returns(panel));
  write_meta_csv(dir / "meta.csv", panel.assets);
  csv::open_output(dir / "config.json") << config.dump(2) << '\n';
  std::cout << "wrote " << (dir / "levels.csv").string() << ", meta.csv, truth.csv, config.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macro regime detection, signed-network validation and lead-lag analysis"};
  app.require_subcommand(1);

  // each subcommand owns its flags; CLI11 writes defaults into every bound variable
  std::array<CommonFlags, 8> flags;
  std::map<CLI::App*, std::pair<Stage, CommonFlags*>> stage_of;
  const std::pair<const char*, Stage> stages[] = {
      {"run", Stage::strategy},          {"ingest", Stage::ingest},   {"correlate", Stage::correlate},
      {"regimes", Stage::regimes},       {"network", Stage::network}, {"profile", Stage::profile},
      {"leadlag", Stage::leadlag},       {"strategy", Stage::strategy}};
  const std::map<std::string, std::string> help{
      {"run", "full pipeline"},
      {"ingest", "load levels and compute returns"},
      {"correlate", "sliding-window correlation stack"},
      {"regimes", "similarity, PCA and KMeans++ regimes"},
      {"network", "signed-network stability series"},
      {"profile", "per-regime profiles"},
      {"leadlag", "per-regime Granger lead-lag clustering"},
      {"strategy", "lead-lag strategy vs uniform benchmark"}};
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const auto& [name, stage] = stages[i];
    auto* cmd = app.add_subcommand(name, help.at(name) + " (runs every earlier stage, cached with --resume)");
    add_common(cmd, flags[i]);
    stage_of[cmd] = {stage, &flags[i]};
  }

  SynthFlags sf;
  auto* syn = app.add_subcommand("synth", "write a synthetic panel with planted structure");
  syn->add_option("--kind", sf.kind, "regimes | leadlag")->check(CLI::IsMember({"regimes", "leadlag"}));
  syn->add_option("--out", sf.out, "output directory");
  syn->add_option("--seed", sf.seed, "generator seed");
  syn->add_option("--regimes", sf.regimes, "planted regimes (regimes kind)");
  syn->add_option("--assets", sf.assets, "assets (regimes kind)");
  syn->add_option("--rows-per-regime", sf.rows_per_regime, "rows per regime (regimes kind)");
  syn->add_option("--clusters", sf.clusters, "clusters in the lead-lag chain (leadlag kind)");
  syn->add_option("--cluster-size", sf.cluster_size, "assets per cluster (leadlag kind)");
  syn->add_option("--lag", sf.lag, "planted lag in rows (leadlag kind)");
  syn->add_option("--coupling", sf.coupling, "follower coupling in (0, 1] (leadlag kind)");
  syn->add_option("--noise", sf.noise, "follower noise scale (leadlag kind)");
  syn->add_option("--rows", sf.rows, "rows (leadlag kind)");
  int threads_unused = 0;
  syn->add_option("--threads", threads_unused, "accepted for symmetry; generation is serial");

  CLI11_PARSE(app, argc, argv);
  try {
    if (syn->parsed()) return synth(sf);
    for (const auto& [cmd, target] : stage_of)
      if (cmd->parsed()) return run_stage(*target.second, target.first);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
