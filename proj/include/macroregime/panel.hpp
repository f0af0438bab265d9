#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"

namespace macroregime {

enum class AssetClass {
  equity,
  commodity,
  fixed_income,
  cash,
  currency,
  volatility,
  bond_spread,
  interest_rate,
};

enum class ReturnKind { percent_change, simple_difference };

std::string to_string(AssetClass c);
std::string to_string(ReturnKind k);
AssetClass parse_asset_class(std::string_view text);
ReturnKind parse_return_kind(std::string_view text);
inline constexpr int kAssetClassCount = 8;

struct AssetMeta {
  int id = 0;
  std::string name;
  AssetClass asset_class = AssetClass::equity;
  ReturnKind return_kind = ReturnKind::percent_change;
};

/// Dated price/level panel as read from disk. Missing cells are NaN.
struct LevelsPanel {
  std::vector<Date> dates;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // T x N, column-major so each asset is contiguous

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return columns.size(); }
};

/// Aligned, complete matrix of returns. Immutable once validated.
struct ReturnsPanel {
  std::vector<Date> dates;
  Eigen::MatrixXd values;  // T x N
  std::vector<AssetMeta> assets;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return assets.size(); }

  /// Throws PreconditionError if any ReturnsPanel invariant is violated.
  void validate() const;
  std::vector<int> asset_ids() const;
  std::optional<std::size_t> row_of(const Date& d) const;
};

struct CsvSchema {
  std::string date_column = "date";
  std::vector<std::string> columns;  // empty: every non-date column, in file order
  bool allow_missing = false;        // false: blank/NaN cells are a hard error
};

/// Reads a dated levels CSV. Rows are returned sorted by date.
LevelsPanel load_levels(const std::filesystem::path& path, const CsvSchema& schema = {});
LevelsPanel parse_levels(std::string_view csv_text, const CsvSchema& schema = {},
                         const std::string& source = "<memory>");

/// Sidecar metadata: CSV with header `id,name,asset_class,return_kind`.
std::vector<AssetMeta> load_meta(const std::filesystem::path& path);
std::vector<AssetMeta> parse_meta(std::string_view csv_text, const std::string& source = "<memory>");

/// Reorders metadata to match the panel's columns by name.
std::vector<AssetMeta> align_meta(const LevelsPanel& levels, const std::vector<AssetMeta>& meta);

struct ReturnOptions {
  // simple_difference is reserved for interest rates unless this is set
  bool allow_simple_difference_any_class = false;
};

ReturnsPanel to_returns(const LevelsPanel& levels, const std::vector<AssetMeta>& meta,
                        const ReturnOptions& options = {});

/// Drops columns with interior gaps, then trims rows to the common observed date range.
LevelsPanel restrict_complete(const LevelsPanel& levels, Diagnostics* diag = nullptr);

void write_levels_csv(const std::filesystem::path& path, const LevelsPanel& levels);
void write_meta_csv(const std::filesystem::path& path, const std::vector<AssetMeta>& meta);
void write_returns_csv(const std::filesystem::path& path, const ReturnsPanel& panel);
ReturnsPanel load_returns(const std::filesystem::path& returns_csv,
                          const std::filesystem::path& meta_csv);

/// Sub-panel containing only the given rows (in order).
ReturnsPanel select_rows(const ReturnsPanel& panel, std::size_t begin, std::size_t end);

}  // namespace macroregime
