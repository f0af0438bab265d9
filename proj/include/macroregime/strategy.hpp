#pragma once

#include <filesystem>
#include <vector>

#include "macroregime/common.hpp"
#include "macroregime/leadlag.hpp"
#include "macroregime/panel.hpp"

namespace macroregime {

struct TradeRecord {
  int regime = 0;
  Date open_date;   // close of the last signal day
  Date close_date;  // exactly `lag` panel rows after open_date
  std::size_t entry_row = 0;       // first row of the holding period
  std::size_t signal_last_row = 0;  // last row feeding the signal, always entry_row - 1
  int direction = 0;
  std::vector<int> assets;  // lagging-cluster asset ids
  double signal_value = 0.0;
  double realized_return = 0.0;   // direction x mean basket holding return
  double benchmark_return = 0.0;  // mean all-asset holding return over the same rows
};

struct RegimeStrategyResult {
  int regime = 0;
  std::size_t lag = 0;
  double strategy_mean_return = kMissing;
  double benchmark_mean_return = kMissing;
  std::size_t trade_count = 0;
  std::size_t cycle_count = 0;
  bool skipped = false;
};

struct StrategyReport {
  std::vector<RegimeStrategyResult> regimes;
  std::vector<TradeRecord> trades;
};

/// Inputs for one regime: the panel rows it owns, as contiguous spans, and its lead-lag clustering.
struct RegimeSignal {
  int regime = 0;
  std::vector<RowSpan> spans;
  LeadLagClustering clustering;
};

/// Holding-period return of one asset over rows [first, last]: compounded for
/// percent changes, summed for simple differences.
double holding_return(const ReturnsPanel& panel, std::size_t asset, std::size_t first, std::size_t last);

/// Within each span, non-overlapping g-row cycles start at span.begin + g. The
/// signal is the mean leading-cluster return over the g rows before entry;
/// the position (sign of the signal) in an equal-weight basket of the lagging
/// cluster is held for the next g rows. A zero signal skips the cycle. The
/// benchmark holds all assets equally over each traded cycle.
StrategyReport run_leadlag_strategy(const ReturnsPanel& panel, const std::vector<RegimeSignal>& regimes,
                                    Diagnostics* diag = nullptr);

void write_trades_csv(const std::filesystem::path& path, const StrategyReport& report);
void write_comparison_csv(const std::filesystem::path& path, const StrategyReport& report);

}  // namespace macroregime
