#include "macroregime/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "macroregime/csv.hpp"
#include "macroregime/leadlag.hpp"
#include "macroregime/panel.hpp"
#include "macroregime/profile.hpp"
#include "macroregime/strategy.hpp"

namespace macroregime {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kToolVersion = "0.1.0";

// Typed access to one config section that records defaults and rejects unknown keys.
class Section {
 public:
  Section(const json& root, std::string name, std::vector<std::string>& defaults)
      : name_(std::move(name)), defaults_(defaults) {
    if (root.contains(name_)) {
      node_ = root.at(name_);
      if (!node_.is_object()) throw ParseError("config: section '" + name_ + "' must be an object");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) {
      defaults_.push_back(name_ + "." + key);
      return fallback;
    }
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ParseError("config: " + name_ + "." + key + ": " + e.what());
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  const json& raw(const std::string& key) const { return node_.at(key); }

  void finish() const {
    if (node_.is_null()) return;
    for (const auto& [key, value] : node_.items())
      if (!seen_.contains(key)) throw ParseError("config: unknown key '" + name_ + "." + key + "'");
  }

 private:
  std::string name_;
  json node_;
  std::vector<std::string>& defaults_;
  std::set<std::string> seen_;
};

// Two-element arrays are inclusive ranges; longer arrays list values explicitly.
std::vector<std::size_t> k_range(Section& s, const std::string& key, std::vector<std::size_t> fallback) {
  auto v = s.get<std::vector<std::size_t>>(key, {});
  if (v.empty()) return fallback;
  if (v.size() == 2 && v[0] <= v[1]) {
    std::vector<std::size_t> out;
    for (auto k = v[0]; k <= v[1]; ++k) out.push_back(k);
    return out;
  }
  return v;
}

json range_json(const std::vector<std::size_t>& v) { return v; }

std::string stamp_now() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const auto day = std::chrono::floor<std::chrono::days>(now);
  const std::chrono::hh_mm_ss hms{now - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d%02d%02d", Date(day).to_string().c_str(), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  static const std::set<std::string> known{"data",    "window",  "similarity", "pca",     "kmeans",  "stability",
                                           "network", "profile", "leadlag",    "strategy"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ParseError("config: unknown section '" + key + "'");

  PipelineConfig c;
  auto& d = c.defaults_applied;
  auto resolve = [&](const std::string& p) { return p.empty() || fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
  {
    Section s(j, "data", d);
    if (!s.has("levels_path") || !s.has("meta_path"))
      throw ParseError("config: data.levels_path and data.meta_path are required");
    c.levels_path = resolve(s.get<std::string>("levels_path", ""));
    c.meta_path = resolve(s.get<std::string>("meta_path", ""));
    c.restrict_complete = s.get("restrict_complete", false);
    c.allow_simple_difference_any_class = s.get("allow_simple_difference_any_class", false);
    s.finish();
  }
  {
    Section s(j, "window", d);
    c.window.length = s.get<std::size_t>("length", 0);
    c.window.stride = s.get<std::size_t>("stride", 5);
    c.window.method = parse_correlation_method(s.get<std::string>("method", "weighted_kendall"));
    s.finish();
  }
  {
    Section s(j, "similarity", d);
    c.similarity = parse_similarity_kind(s.get<std::string>("kind", "metacorrelation"));
    s.finish();
  }
  {
    Section s(j, "pca", d);
    const bool dims = s.has("dims"), target = s.has("variance_target");
    if (dims && target) throw ParseError("config: pca takes either dims or variance_target, not both");
    if (dims)
      c.pca = PcaRequest::count(s.get<std::size_t>("dims", 0));
    else
      c.pca = PcaRequest::variance(s.get("variance_target", 0.9));
    s.finish();
  }
  {
    Section s(j, "kmeans", d);
    c.kmeans_k_range = k_range(s, "k_range", c.kmeans_k_range);
    if (s.has("k")) c.kmeans_k = s.get<std::size_t>("k", 0);
    c.kmeans_seed = s.get<std::uint64_t>("seed", 0);
    c.kmeans_restarts = s.get<std::size_t>("restarts", 10);
    c.elbow = parse_elbow_rule(s.get<std::string>("elbow", "log_curvature"));
    s.finish();
  }
  {
    Section s(j, "stability", d);
    c.stability_enabled = s.get("enabled", true);
    s.finish();
  }
  {
    Section s(j, "network", d);
    c.network_threshold = s.get("threshold", 0.2);
    c.network_k_range = k_range(s, "k_range", c.network_k_range);
    c.network_lookback = s.get<std::size_t>("lookback", 4);
    c.tau_plus = s.get("tau_plus", 1.0);
    c.tau_minus = s.get("tau_minus", 1.0);
    c.network_seed = s.get<std::uint64_t>("seed", 0);
    c.network_rule = parse_k_selection_rule(s.get<std::string>("k_rule", "argmax"));
    s.finish();
  }
  {
    Section s(j, "profile", d);
    c.profile_k_range = k_range(s, "k_range", c.profile_k_range);
    c.annualization = s.get("annualization", 252.0);
    s.finish();
  }
  {
    Section s(j, "leadlag", d);
    auto grid = s.get<std::vector<std::size_t>>("lag_grid", {});
    if (!grid.empty()) c.lag_grid = grid;
    c.alpha = s.get("alpha", 0.05);
    c.beta = s.get("beta", 1.0);
    c.leadlag_k_range = k_range(s, "k_range", c.leadlag_k_range);
    c.benjamini_hochberg = s.get("benjamini_hochberg", false);
    c.leadlag_seed = s.get<std::uint64_t>("seed", 0);
    s.finish();
  }
  {
    Section s(j, "strategy", d);
    c.strategy_enabled = s.get("enabled", true);
    s.finish();
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ParseError("config: leadlag.alpha must lie in (0, 1)");
  if (!(c.beta > 0.0)) throw ParseError("config: leadlag.beta must be positive");
  if (c.network_lookback < 1) throw ParseError("config: network.lookback must be >= 1");
  return c;
}

json PipelineConfig::to_json() const {
  json j;
  j["data"] = {{"levels_path", levels_path.string()},
               {"meta_path", meta_path.string()},
               {"restrict_complete", restrict_complete},
               {"allow_simple_difference_any_class", allow_simple_difference_any_class}};
  j["window"] = {{"length", window.length}, {"stride", window.stride}, {"method", to_string(window.method)}};
  j["similarity"] = {{"kind", to_string(similarity)}};
  if (pca.dims > 0)
    j["pca"] = {{"dims", pca.dims}};
  else
    j["pca"] = {{"variance_target", pca.variance_target}};
  j["kmeans"] = {{"k_range", range_json(kmeans_k_range)},
                 {"seed", kmeans_seed},
                 {"restarts", kmeans_restarts},
                 {"elbow", to_string(elbow)}};
  if (kmeans_k) j["kmeans"]["k"] = *kmeans_k;
  j["stability"] = {{"enabled", stability_enabled}};
  j["network"] = {{"threshold", network_threshold}, {"k_range", range_json(network_k_range)},
                  {"lookback", network_lookback},   {"tau_plus", tau_plus},
                  {"tau_minus", tau_minus},         {"seed", network_seed},
                  {"k_rule", to_string(network_rule)}};
  j["profile"] = {{"k_range", range_json(profile_k_range)}, {"annualization", annualization}};
  j["leadlag"] = {{"lag_grid", lag_grid}, {"alpha", alpha}, {"beta", beta}, {"k_range", range_json(leadlag_k_range)},
                  {"benjamini_hochberg", benjamini_hochberg}, {"seed", leadlag_seed}};
  j["strategy"] = {{"enabled", strategy_enabled}};
  return j;
}

void PipelineConfig::override_seed(std::uint64_t seed) {
  kmeans_seed = seed;
  network_seed = seed;
  leadlag_seed = seed;
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(csv::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return PipelineConfig::from_json(j, path.parent_path());
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::correlate: return "correlate";
    case Stage::regimes: return "regimes";
    case Stage::network: return "network";
    case Stage::profile: return "profile";
    case Stage::leadlag: return "leadlag";
    case Stage::strategy: return "strategy";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (auto s : kAllStages)
    if (to_string(s) == text) return s;
  throw ParseError("unknown stage '" + std::string(text) + "'");
}

// Pipeline -------------------------------------------------------------------------

namespace {

struct State {
  ReturnsPanel panel;
  CorrelationStack stack;
  RegimeLabeling labels;
  std::vector<RegimeSignal> signals;
};

std::vector<RegimeSignal> read_leadlag(const fs::path& dir, const ReturnsPanel& panel, const RegimeLabeling& labels) {
  std::vector<RegimeSignal> out;
  const auto rows = regime_rows(labels, panel.rows());
  const auto text = csv::read_file(dir / "summary.csv");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() < 3) throw ParseError((dir / "summary.csv").string() + ": malformed row");
    const int regime = std::stoi(f[0]);
    const std::size_t lag = std::stoul(f[1]), k = std::stoul(f[2]);
    if (lag == 0 || k == 0) continue;  // regime without a clustering
    RegimeSignal s;
    s.regime = regime;
    s.spans = contiguous_spans(rows.at(static_cast<std::size_t>(regime)));
    const auto ctext = csv::read_file(dir / ("regime_" + std::to_string(regime) + "_clustering.csv"));
    std::istringstream cin(ctext);
    std::string cl;
    std::getline(cin, cl);
    std::vector<int> nodes, labels_, ranks;
    while (std::getline(cin, cl)) {
      if (csv::trim(cl).empty()) continue;
      const auto g = csv::split_line(cl);
      nodes.push_back(std::stoi(g.at(0)));
      labels_.push_back(std::stoi(g.at(1)));
      ranks.push_back(std::stoi(g.at(2)));
    }
    s.clustering.partition = Partition::from_labels(nodes, labels_);
    // from_labels renumbers by first occurrence; the files are written canonical already
    s.clustering.ordering.assign(static_cast<std::size_t>(s.clustering.partition.k), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s.clustering.ordering.at(static_cast<std::size_t>(ranks[i])) = s.clustering.partition.assignment[i];
    s.clustering.lag = lag;
    s.clustering.beta = f.size() > 3 ? std::stod(f[3]) : 1.0;
    out.push_back(std::move(s));
  }
  return out;
}

class Runner {
 public:
  Runner(PipelineConfig config, const RunOptions& opt) : cfg_(std::move(config)), opt_(opt) {}

  RunResult run() {
    if (opt_.threads > 0) set_thread_count(opt_.threads);
    if (opt_.seed) cfg_.override_seed(*opt_.seed);
    result_.dir = opt_.out.empty() ? fs::path("runs") / ("run-" + stamp_now()) : opt_.out;
    fs::create_directories(result_.dir);
    manifest_["started_at"] = stamp_now();

    for (auto stage : kAllStages) {
      if (static_cast<int>(stage) > static_cast<int>(opt_.last_stage)) break;
      execute(stage);
    }
    write_manifest();
    return std::move(result_);
  }

 private:
  fs::path stage_dir(Stage s) const { return result_.dir / to_string(s); }

  std::string stage_hash(Stage s) {
    const auto c = cfg_.to_json();
    std::string key = std::to_string(kFormatVersion) + "|" + to_string(s) + "|";
    switch (s) {
      case Stage::ingest:
        key += csv::read_file(cfg_.levels_path) + "|" + csv::read_file(cfg_.meta_path) + "|" + c["data"].dump();
        break;
      case Stage::correlate:
        key += hashes_.at(Stage::ingest) + c["window"].dump();
        break;
      case Stage::regimes:
        key += hashes_.at(Stage::correlate) + c["similarity"].dump() + c["pca"].dump() + c["kmeans"].dump() +
               c["stability"].dump();
        break;
      case Stage::network:
        key += hashes_.at(Stage::correlate) + c["network"].dump();
        break;
      case Stage::profile:
        key += hashes_.at(Stage::regimes) + c["profile"].dump() + c["network"].dump();
        break;
      case Stage::leadlag:
        key += hashes_.at(Stage::regimes) + c["leadlag"].dump();
        break;
      case Stage::strategy:
        key += hashes_.at(Stage::leadlag) + c["strategy"].dump();
        break;
    }
    return fnv1a_hex(key);
  }

  void execute(Stage s) {
    const auto name = to_string(s);
    const auto dir = stage_dir(s);
    const auto hash_file = dir / "stage.hash";
    // the window length default depends on the panel, so resolve it before hashing correlate
    if (s == Stage::correlate && cfg_.window.length == 0) {
      cfg_.window.length = std::max<std::size_t>(3, 2 * state_.panel.cols());
      note_default("window.length resolved to 2N = " + std::to_string(cfg_.window.length));
    }
    hashes_[s] = stage_hash(s);
    bool cached = false;
    if (opt_.resume && fs::exists(hash_file) && csv::trim(csv::read_file(hash_file)) == hashes_[s]) {
      try {
        load(s);
        cached = true;
      } catch (const Error& e) {
        result_.diagnostics.warn("cache for stage '" + name + "' unusable (" + e.what() + "); recomputing");
      }
    }
    if (!cached) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      Diagnostics local;
      try {
        compute(s, dir, &local);
      } catch (const std::exception& e) {
        result_.diagnostics.merge(local);
        manifest_["failed_stage"] = name;
        write_manifest();
        std::string details;
        for (const auto& w : local.warnings()) details += "\n  " + w;
        throw Error("stage '" + name + "' failed: " + e.what() + details);
      }
      for (const auto& w : local.warnings()) result_.diagnostics.warn("[" + name + "] " + w);
      std::ofstream(hash_file) << hashes_[s] << '\n';
      result_.stages_run.push_back(name);
    } else {
      result_.stages_cached.push_back(name);
    }
    manifest_["stages"][name] = {{"hash", hashes_[s]}, {"cached", cached}};
  }

  void note_default(const std::string& what) { resolved_.push_back(what); }

  RegimeConfig regime_config() const {
    RegimeConfig rc;
    rc.window = cfg_.window;
    rc.similarity = cfg_.similarity;
    rc.pca = cfg_.pca;
    rc.kmeans.k_range = cfg_.kmeans_k_range;
    rc.kmeans.seed = cfg_.kmeans_seed;
    rc.kmeans.restarts = cfg_.kmeans_restarts;
    rc.kmeans.fixed_k = cfg_.kmeans_k;
    rc.kmeans.elbow = cfg_.elbow;
    return rc;
  }

  SpongeOptions sponge() const {
    SpongeOptions so;
    so.tau_plus = cfg_.tau_plus;
    so.tau_minus = cfg_.tau_minus;
    so.seed = cfg_.network_seed;
    return so;
  }

  void load(Stage s) {
    const auto dir = stage_dir(s);
    switch (s) {
      case Stage::ingest:
        state_.panel = load_returns(dir / "returns.csv", dir / "meta.csv");
        break;
      case Stage::correlate:
        state_.stack = read_stack(dir / "stack");
        break;
      case Stage::regimes: {
        auto l = read_labels_csv(dir / "labels.csv");
        if (l.dates != state_.stack.end_dates) throw Error("cached labels do not match the correlation stack");
        l.end_rows = state_.stack.end_rows;
        l.stride = state_.stack.spec.stride;
        state_.labels = std::move(l);
        break;
      }
      case Stage::leadlag:
        state_.signals = read_leadlag(dir, state_.panel, state_.labels);
        break;
      case Stage::network:
      case Stage::profile:
      case Stage::strategy:
        break;
    }
  }

  void compute(Stage s, const fs::path& dir, Diagnostics* diag) {
    switch (s) {
      case Stage::ingest: return ingest(dir, diag);
      case Stage::correlate: return correlate(dir, diag);
      case Stage::regimes: return regimes(dir, diag);
      case Stage::network: return network(dir, diag);
      case Stage::profile: return profile(dir, diag);
      case Stage::leadlag: return leadlag(dir, diag);
      case Stage::strategy: return strategy(dir, diag);
    }
  }

  void ingest(const fs::path& dir, Diagnostics* diag) {
    CsvSchema schema;
    schema.allow_missing = cfg_.restrict_complete;
    auto levels = load_levels(cfg_.levels_path, schema);
    if (cfg_.restrict_complete) levels = restrict_complete(levels, diag);
    const auto meta = align_meta(levels, load_meta(cfg_.meta_path));
    ReturnOptions ro;
    ro.allow_simple_difference_any_class = cfg_.allow_simple_difference_any_class;
    state_.panel = to_returns(levels, meta, ro);
    write_returns_csv(dir / "returns.csv", state_.panel);
    write_meta_csv(dir / "meta.csv", state_.panel.assets);
  }

  void correlate(const fs::path& dir, Diagnostics* diag) {
    cfg_.window.validate(state_.panel.cols(), diag);
    state_.stack = windowed_stack(state_.panel, cfg_.window, diag);
    std::vector<std::string> names;
    for (const auto& a : state_.panel.assets) names.push_back(a.name);
    write_stack(dir / "stack", state_.stack, names);
  }

  void regimes(const fs::path& dir, Diagnostics* diag) {
    const auto rc = regime_config();
    auto run = detect_regimes(state_.stack, rc, diag);
    state_.labels = run.labeling;
    write_labels_csv(dir / "labels.csv", run.labeling);
    write_inertia_csv(dir / "inertia.csv", run.labeling);
    write_explained_variance_csv(dir / "explained_variance.csv", run.embedding);
    {
      auto out = csv::open_output(dir / "similarity.csv");
      out << "date";
      for (const auto& d : run.similarity.dates) out << ',' << d.to_string();
      out << '\n';
      for (Eigen::Index i = 0; i < run.similarity.values.rows(); ++i) {
        out << run.similarity.dates[static_cast<std::size_t>(i)].to_string();
        for (Eigen::Index j = 0; j < run.similarity.values.cols(); ++j)
          out << ',' << csv::format_double(run.similarity.values(i, j));
        out << '\n';
      }
    }
    {
      auto out = csv::open_output(dir / "embedding.csv");
      out << "date";
      for (std::size_t c = 0; c < run.embedding.dims; ++c) out << ",pc" << c + 1;
      out << '\n';
      for (Eigen::Index i = 0; i < run.embedding.points.rows(); ++i) {
        out << run.similarity.dates[static_cast<std::size_t>(i)].to_string();
        for (Eigen::Index c = 0; c < run.embedding.points.cols(); ++c)
          out << ',' << csv::format_double(run.embedding.points(i, c));
        out << '\n';
      }
    }
    if (cfg_.stability_enabled) {
      const auto rows = stability_report(state_.panel, run.labeling, default_perturbations(rc, run.labeling), diag);
      write_stability_csv(dir / "stability.csv", rows);
    }
  }

  void network(const fs::path& dir, Diagnostics* diag) {
    StabilityOptions so;
    so.threshold = cfg_.network_threshold;
    so.k_range = cfg_.network_k_range;
    so.lookback = cfg_.network_lookback;
    so.sponge = sponge();
    so.rule = cfg_.network_rule;
    const auto series = stability_series(state_.stack, state_.panel.asset_ids(), so, diag);
    write_partitions_csv(dir / "partitions.csv", series);
    write_stability_series_csv(dir / "stability.csv", series);
    if (state_.labels.labels.size() == series.dates.size()) {
      auto out = csv::open_output(dir / "regime_breaks.csv");
      out << "date,from_regime,to_regime,ari\n";
      for (std::size_t t = 1; t < series.dates.size(); ++t)
        if (state_.labels.labels[t] != state_.labels.labels[t - 1])
          out << series.dates[t].to_string() << ',' << state_.labels.labels[t - 1] << ',' << state_.labels.labels[t]
              << ',' << csv::format_double(series.values[t]) << '\n';
    }
  }

  void profile(const fs::path& dir, Diagnostics* diag) {
    ProfileOptions po;
    po.annualization = cfg_.annualization;
    po.k_range = cfg_.profile_k_range;
    po.sponge = sponge();
    po.rule = cfg_.network_rule;
    const auto profiles = profile_regimes(state_.panel, state_.stack, state_.labels, po, diag);
    write_profiles(dir, profiles, state_.panel.assets);
  }

  void leadlag(const fs::path& dir, Diagnostics* diag) {
    const auto rows = regime_rows(state_.labels, state_.panel.rows());
    const auto ids = state_.panel.asset_ids();
    std::vector<int> classes;
    for (const auto& a : state_.panel.assets) classes.push_back(static_cast<int>(a.asset_class));
    LeadLagOptions lo;
    lo.alpha = cfg_.alpha;
    lo.benjamini_hochberg = cfg_.benjamini_hochberg;
    std::vector<std::size_t> ks;
    for (auto k : cfg_.leadlag_k_range)
      if (k >= 2 && k <= ids.size()) ks.push_back(k);

    auto summary = csv::open_output(dir / "summary.csv");
    summary << "regime_id,lag,k,beta,v_score,leading_cluster,lagging_cluster,significant\n";
    auto counts = csv::open_output(dir / "lag_counts.csv");
    counts << "regime_id,lag,significant\n";
    state_.signals.clear();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto spans = contiguous_spans(rows[r]);
      const auto tag = "regime " + std::to_string(r);
      try {
        auto opt = optimal_lag(state_.panel.values, spans, cfg_.lag_grid, lo, diag);
        for (std::size_t i = 0; i < opt.grid.size(); ++i) counts << r << ',' << opt.grid[i] << ',' << opt.counts[i] << '\n';
        write_edges_csv(dir / ("regime_" + std::to_string(r) + "_edges.csv"), opt.matrix, ids);
        if (ks.empty()) throw PreconditionError("no admissible k for " + std::to_string(ids.size()) + " assets");
        auto c = select_k_by_vmeasure(opt.matrix.strengths, ids, classes, ks, cfg_.beta, cfg_.leadlag_seed);
        c.lag = opt.lag;
        write_clustering_csv(dir / ("regime_" + std::to_string(r) + "_clustering.csv"), c);
        summary << r << ',' << c.lag << ',' << c.partition.k << ',' << csv::format_double(c.beta) << ','
                << csv::format_double(c.v_score) << ',' << c.leading() << ',' << c.lagging() << ','
                << opt.matrix.significant_count << '\n';
        state_.signals.push_back({static_cast<int>(r), spans, std::move(c)});
      } catch (const PreconditionError& e) {
        warn(diag, tag + " lead-lag skipped: " + e.what());
        summary << r << ",0,0,NaN,NaN,,,0\n";
      }
    }
  }

  void strategy(const fs::path& dir, Diagnostics* diag) {
    if (!cfg_.strategy_enabled) {
      warn(diag, "strategy disabled by config");
      return;
    }
    const auto report = run_leadlag_strategy(state_.panel, state_.signals, diag);
    write_trades_csv(dir / "trades.csv", report);
    write_comparison_csv(dir / "comparison.csv", report);
  }

  void write_manifest() {
    manifest_["format_version"] = kFormatVersion;
    manifest_["tool_version"] = kToolVersion;
    const auto cj = cfg_.to_json();
    manifest_["config"] = cj;
    manifest_["config_hash"] = fnv1a_hex(cj.dump());
    manifest_["defaults_applied"] = cfg_.defaults_applied;
    manifest_["defaults_resolved"] = resolved_;
    manifest_["seeds"] = {{"kmeans", cfg_.kmeans_seed}, {"network", cfg_.network_seed}, {"leadlag", cfg_.leadlag_seed}};
    manifest_["threads"] = thread_count();
    manifest_["warnings"] = result_.diagnostics.warnings();
    std::ofstream(result_.dir / "manifest.json") << manifest_.dump(2) << '\n';
  }

  PipelineConfig cfg_;
  RunOptions opt_;
  RunResult result_;
  State state_;
  std::map<Stage, std::string> hashes_;
  std::vector<std::string> resolved_;
  json manifest_;
};

}  // namespace

RunResult run_pipeline(PipelineConfig config, const RunOptions& options) {
  return Runner(std::move(config), options).run();
}

}  // namespace macroregime
