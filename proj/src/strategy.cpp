#include "macroregime/strategy.hpp"

#include <map>

#include "macroregime/csv.hpp"

namespace macroregime {

double holding_return(const ReturnsPanel& panel, std::size_t asset, std::size_t first, std::size_t last) {
  const auto j = static_cast<Eigen::Index>(asset);
  if (panel.assets[asset].return_kind == ReturnKind::simple_difference) {
    double sum = 0.0;
    for (std::size_t r = first; r <= last; ++r) sum += panel.values(static_cast<Eigen::Index>(r), j);
    return sum;
  }
  double growth = 1.0;
  for (std::size_t r = first; r <= last; ++r) growth *= 1.0 + panel.values(static_cast<Eigen::Index>(r), j);
  return growth - 1.0;
}

namespace {

std::vector<std::size_t> cluster_columns(const ReturnsPanel& panel, const LeadLagClustering& c, int cluster) {
  std::map<int, std::size_t> col_of;
  for (std::size_t j = 0; j < panel.cols(); ++j) col_of[panel.assets[j].id] = j;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < c.partition.size(); ++i)
    if (c.partition.assignment[i] == cluster) {
      const auto it = col_of.find(c.partition.nodes[i]);
      if (it == col_of.end())
        throw PreconditionError("strategy: asset id " + std::to_string(c.partition.nodes[i]) + " not in panel");
      cols.push_back(it->second);
    }
  return cols;
}

double basket_return(const ReturnsPanel& panel, const std::vector<std::size_t>& cols, std::size_t first,
                     std::size_t last) {
  double sum = 0.0;
  for (auto j : cols) sum += holding_return(panel, j, first, last);
  return sum / static_cast<double>(cols.size());
}

}  // namespace

StrategyReport run_leadlag_strategy(const ReturnsPanel& panel, const std::vector<RegimeSignal>& regimes,
                                    Diagnostics* diag) {
  StrategyReport report;
  std::vector<std::size_t> all_cols(panel.cols());
  for (std::size_t j = 0; j < all_cols.size(); ++j) all_cols[j] = j;

  for (const auto& plan : regimes) {
    RegimeStrategyResult res;
    res.regime = plan.regime;
    res.lag = plan.clustering.lag;
    const std::size_t g = res.lag;
    if (g < 1) throw PreconditionError("strategy: regime " + std::to_string(plan.regime) + " has no lag");
    const auto leaders = cluster_columns(panel, plan.clustering, plan.clustering.leading());
    const auto laggers = cluster_columns(panel, plan.clustering, plan.clustering.lagging());
    std::vector<int> lagger_ids;
    for (auto j : laggers) lagger_ids.push_back(panel.assets[j].id);

    double strat_sum = 0.0, bench_sum = 0.0;
    for (const auto& span : plan.spans) {
      if (span.end > panel.rows()) throw PreconditionError("strategy: span beyond the panel");
      for (std::size_t e = span.begin + g; e + g <= span.end; e += g) {
        ++res.cycle_count;
        double signal = 0.0;
        for (auto j : leaders)
          for (std::size_t r = e - g; r < e; ++r) signal += panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        signal /= static_cast<double>(leaders.size() * g);
        const std::size_t signal_last = e - 1;
        if (signal == 0.0) continue;

        TradeRecord t;
        t.regime = plan.regime;
        t.entry_row = e;
        t.signal_last_row = signal_last;
        t.open_date = panel.dates[e - 1];
        t.close_date = panel.dates[e + g - 1];
        t.direction = signal > 0.0 ? 1 : -1;
        t.assets = lagger_ids;
        t.signal_value = signal;
        t.realized_return = t.direction * basket_return(panel, laggers, e, e + g - 1);
        t.benchmark_return = basket_return(panel, all_cols, e, e + g - 1);
        strat_sum += t.realized_return;
        bench_sum += t.benchmark_return;
        ++res.trade_count;
        report.trades.push_back(std::move(t));
      }
    }
    if (res.cycle_count == 0) {
      res.skipped = true;
      warn(diag, "strategy: regime " + std::to_string(plan.regime) + " has no span of at least 2 x " +
                     std::to_string(g) + " rows; skipped");
    }
    if (res.trade_count > 0) {
      res.strategy_mean_return = strat_sum / static_cast<double>(res.trade_count);
      res.benchmark_mean_return = bench_sum / static_cast<double>(res.trade_count);
    }
    report.regimes.push_back(res);
  }
  return report;
}

void write_trades_csv(const std::filesystem::path& path, const StrategyReport& report) {
  auto out = csv::open_output(path);
  out << "regime_id,open_date,close_date,direction,signal,realized_return,benchmark_return,assets\n";
  for (const auto& t : report.trades) {
    out << t.regime << ',' << t.open_date.to_string() << ',' << t.close_date.to_string() << ',' << t.direction
        << ',' << csv::format_double(t.signal_value) << ',' << csv::format_double(t.realized_return) << ','
        << csv::format_double(t.benchmark_return) << ',';
    for (std::size_t i = 0; i < t.assets.size(); ++i) out << (i ? ";" : "") << t.assets[i];
    out << '\n';
  }
}

void write_comparison_csv(const std::filesystem::path& path, const StrategyReport& report) {
  auto out = csv::open_output(path);
  out << "regime_id,lag,strategy_mean_return,benchmark_mean_return,trade_count,cycles,skipped\n";
  for (const auto& r : report.regimes)
    out << r.regime << ',' << r.lag << ',' << csv::format_double(r.strategy_mean_return) << ','
        << csv::format_double(r.benchmark_mean_return) << ',' << r.trade_count << ',' << r.cycle_count << ','
        << (r.skipped ? 1 : 0) << '\n';
}

}  // namespace macroregime
