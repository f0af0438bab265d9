#include "macroregime/panel.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>

#include "macroregime/csv.hpp"

namespace macroregime {

namespace {

constexpr std::array<std::string_view, kAssetClassCount> kClassNames = {
    "equity", "commodity", "fixed_income", "cash",
    "currency", "volatility", "bond_spread", "interest_rate"};

bool is_missing_marker(std::string_view field) {
  field = csv::trim(field);
  return field.empty() || field == "NaN" || field == "nan" || field == "NA";
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!csv::trim(line).empty()) lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace

std::string to_string(AssetClass c) { return std::string(kClassNames[static_cast<int>(c)]); }

std::string to_string(ReturnKind k) {
  return k == ReturnKind::percent_change ? "percent_change" : "simple_difference";
}

AssetClass parse_asset_class(std::string_view text) {
  text = csv::trim(text);
  for (int i = 0; i < kAssetClassCount; ++i)
    if (kClassNames[i] == text) return static_cast<AssetClass>(i);
  throw ParseError("unknown asset class '" + std::string(text) + "'");
}

ReturnKind parse_return_kind(std::string_view text) {
  text = csv::trim(text);
  if (text == "percent_change") return ReturnKind::percent_change;
  if (text == "simple_difference") return ReturnKind::simple_difference;
  throw ParseError("unknown return kind '" + std::string(text) + "'");
}

void ReturnsPanel::validate() const {
  if (dates.empty()) throw PreconditionError("returns panel has no dates");
  if (static_cast<std::size_t>(values.rows()) != dates.size() ||
      static_cast<std::size_t>(values.cols()) != assets.size())
    throw PreconditionError("returns panel shape does not match dates/assets");
  for (std::size_t t = 1; t < dates.size(); ++t)
    if (!(dates[t - 1] < dates[t]))
      throw PreconditionError("dates not strictly increasing at " + dates[t].to_string());
  std::set<int> ids;
  for (const auto& a : assets)
    if (!ids.insert(a.id).second) throw PreconditionError("duplicate asset id " + std::to_string(a.id));
  if (!values.allFinite()) throw PreconditionError("returns panel contains non-finite values");
}

std::vector<int> ReturnsPanel::asset_ids() const {
  std::vector<int> ids;
  ids.reserve(assets.size());
  for (const auto& a : assets) ids.push_back(a.id);
  return ids;
}

std::optional<std::size_t> ReturnsPanel::row_of(const Date& d) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

LevelsPanel parse_levels(std::string_view csv_text, const CsvSchema& schema,
                         const std::string& source) {
  const auto lines = split_lines(csv_text);
  if (lines.empty()) throw ParseError(source + ": empty file");
  const auto header = csv::split_line(lines[0]);
  std::vector<std::string> names;
  for (const auto& h : header) names.emplace_back(csv::trim(h));

  const auto date_it = std::find(names.begin(), names.end(), schema.date_column);
  if (date_it == names.end())
    throw ParseError(source + ": missing date column '" + schema.date_column + "'");
  const auto date_col = static_cast<std::size_t>(date_it - names.begin());

  std::vector<std::size_t> picked;
  std::vector<std::string> picked_names;
  if (schema.columns.empty()) {
    for (std::size_t c = 0; c < names.size(); ++c)
      if (c != date_col) {
        picked.push_back(c);
        picked_names.push_back(names[c]);
      }
  } else {
    for (const auto& want : schema.columns) {
      const auto it = std::find(names.begin(), names.end(), want);
      if (it == names.end()) throw ParseError(source + ": missing column '" + want + "'");
      picked.push_back(static_cast<std::size_t>(it - names.begin()));
      picked_names.push_back(want);
    }
  }

  struct Row {
    Date date;
    std::vector<double> cells;
  };
  std::vector<Row> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = csv::split_line(lines[li]);
    const std::string where = source + ": row " + std::to_string(li + 1);
    if (fields.size() != names.size())
      throw ParseError(where + ": expected " + std::to_string(names.size()) + " fields, got " +
                       std::to_string(fields.size()));
    Row row;
    try {
      row.date = Date::parse(csv::trim(fields[date_col]));
    } catch (const ParseError& e) {
      throw ParseError(where + ", column '" + schema.date_column + "': " + e.what());
    }
    row.cells.reserve(picked.size());
    for (std::size_t k = 0; k < picked.size(); ++k) {
      const auto& field = fields[picked[k]];
      double v = 0.0;
      if (is_missing_marker(field)) {
        if (!schema.allow_missing)
          throw ParseError(where + ", column '" + picked_names[k] + "': missing value");
        v = kMissing;
      } else if (!csv::parse_double(field, v) || !std::isfinite(v)) {
        throw ParseError(where + ", column '" + picked_names[k] + "': unparseable number '" +
                         field + "'");
      }
      row.cells.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw ParseError(source + ": duplicate date " + rows[i].date.to_string());

  LevelsPanel out;
  out.columns = std::move(picked_names);
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(picked.size()));
  out.dates.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.dates.push_back(rows[r].date);
    for (std::size_t c = 0; c < picked.size(); ++c)
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].cells[c];
  }
  return out;
}

LevelsPanel load_levels(const std::filesystem::path& path, const CsvSchema& schema) {
  return parse_levels(csv::read_file(path), schema, path.string());
}

std::vector<AssetMeta> parse_meta(std::string_view csv_text, const std::string& source) {
  const auto lines = split_lines(csv_text);
  if (lines.empty()) throw ParseError(source + ": empty metadata file");
  const auto header = csv::split_line(lines[0]);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(csv::trim(header[i]))] = i;
  for (const char* need : {"id", "name", "asset_class", "return_kind"})
    if (!col.count(need)) throw ParseError(source + ": metadata missing column '" + need + "'");

  std::vector<AssetMeta> out;
  std::set<int> ids;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = csv::split_line(lines[li]);
    const std::string where = source + ": row " + std::to_string(li + 1);
    if (f.size() != header.size()) throw ParseError(where + ": wrong field count");
    AssetMeta m;
    double id = 0;
    if (!csv::parse_double(f[col["id"]], id) || id != std::floor(id))
      throw ParseError(where + ": bad id '" + f[col["id"]] + "'");
    m.id = static_cast<int>(id);
    m.name = std::string(csv::trim(f[col["name"]]));
    try {
      m.asset_class = parse_asset_class(f[col["asset_class"]]);
      m.return_kind = parse_return_kind(f[col["return_kind"]]);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!ids.insert(m.id).second) throw ParseError(where + ": duplicate asset id " + std::to_string(m.id));
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<AssetMeta> load_meta(const std::filesystem::path& path) {
  return parse_meta(csv::read_file(path), path.string());
}

std::vector<AssetMeta> align_meta(const LevelsPanel& levels, const std::vector<AssetMeta>& meta) {
  std::vector<AssetMeta> out;
  out.reserve(levels.cols());
  for (const auto& name : levels.columns) {
    const auto it = std::find_if(meta.begin(), meta.end(),
                                 [&](const AssetMeta& m) { return m.name == name; });
    if (it == meta.end()) throw PreconditionError("no metadata for column '" + name + "'");
    out.push_back(*it);
  }
  return out;
}

ReturnsPanel to_returns(const LevelsPanel& levels, const std::vector<AssetMeta>& meta,
                        const ReturnOptions& options) {
  const auto T = levels.rows();
  const auto N = levels.cols();
  if (T < 2) throw PreconditionError("to_returns needs at least 2 level rows");
  if (meta.size() != N)
    throw PreconditionError("metadata has " + std::to_string(meta.size()) + " entries for " +
                            std::to_string(N) + " columns");
  std::set<int> ids;
  for (const auto& m : meta) {
    if (!ids.insert(m.id).second) throw PreconditionError("duplicate asset id " + std::to_string(m.id));
    if (m.return_kind == ReturnKind::simple_difference && m.asset_class != AssetClass::interest_rate &&
        !options.allow_simple_difference_any_class)
      throw PreconditionError("simple_difference returns are reserved for interest_rate assets ('" +
                              m.name + "')");
  }

  ReturnsPanel out;
  out.assets = meta;
  out.dates.assign(levels.dates.begin() + 1, levels.dates.end());
  out.values.resize(static_cast<Eigen::Index>(T - 1), static_cast<Eigen::Index>(N));
  for (std::size_t j = 0; j < N; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    for (std::size_t t = 1; t < T; ++t) {
      const auto r = static_cast<Eigen::Index>(t);
      const double prev = levels.values(r - 1, c);
      const double cur = levels.values(r, c);
      if (!std::isfinite(prev) || !std::isfinite(cur))
        throw PreconditionError("missing level for '" + meta[j].name + "' around " +
                                levels.dates[t].to_string());
      if (meta[j].return_kind == ReturnKind::percent_change) {
        if (prev == 0.0)
          throw PreconditionError("zero level for '" + meta[j].name + "' at " +
                                  levels.dates[t - 1].to_string() + " under percent_change");
        out.values(r - 1, c) = (cur - prev) / prev;
      } else {
        out.values(r - 1, c) = cur - prev;
      }
    }
  }
  // A zero at the final row would make the next (absent) return undefined; the
  // percent_change precondition applies to every date.
  for (std::size_t j = 0; j < N; ++j)
    if (meta[j].return_kind == ReturnKind::percent_change &&
        levels.values(static_cast<Eigen::Index>(T - 1), static_cast<Eigen::Index>(j)) == 0.0)
      throw PreconditionError("zero level for '" + meta[j].name + "' at " +
                              levels.dates[T - 1].to_string() + " under percent_change");
  out.validate();
  return out;
}

LevelsPanel restrict_complete(const LevelsPanel& levels, Diagnostics* diag) {
  const auto T = levels.rows();
  std::vector<std::size_t> keep;
  std::size_t lo = 0, hi = T;  // common observed range [lo, hi)
  for (std::size_t j = 0; j < levels.cols(); ++j) {
    const auto col = levels.values.col(static_cast<Eigen::Index>(j));
    std::size_t first = T, last = 0;
    for (std::size_t t = 0; t < T; ++t)
      if (!std::isnan(col(static_cast<Eigen::Index>(t)))) {
        first = std::min(first, t);
        last = t;
      }
    bool gap = first == T;
    for (std::size_t t = first; !gap && t <= last; ++t)
      gap = std::isnan(col(static_cast<Eigen::Index>(t)));
    if (gap) {
      warn(diag, "dropping column '" + levels.columns[j] + "' (missing values)");
      continue;
    }
    keep.push_back(j);
    lo = std::max(lo, first);
    hi = std::min(hi, last + 1);
  }
  if (keep.empty()) throw PreconditionError("restrict_complete: every column has missing values");
  if (lo >= hi) throw PreconditionError("restrict_complete: kept columns share no common date range");

  LevelsPanel out;
  out.dates.assign(levels.dates.begin() + static_cast<std::ptrdiff_t>(lo),
                   levels.dates.begin() + static_cast<std::ptrdiff_t>(hi));
  out.values.resize(static_cast<Eigen::Index>(hi - lo), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.columns.push_back(levels.columns[keep[k]]);
    out.values.col(static_cast<Eigen::Index>(k)) = levels.values.col(static_cast<Eigen::Index>(keep[k]))
                                                      .segment(static_cast<Eigen::Index>(lo),
                                                               static_cast<Eigen::Index>(hi - lo));
  }
  return out;
}

void write_levels_csv(const std::filesystem::path& path, const LevelsPanel& levels) {
  auto out = csv::open_output(path);
  out << "date";
  for (const auto& c : levels.columns) out << ',' << c;
  out << '\n';
  for (std::size_t t = 0; t < levels.rows(); ++t) {
    out << levels.dates[t].to_string();
    for (std::size_t j = 0; j < levels.cols(); ++j)
      out << ',' << csv::format_double(levels.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
}

void write_meta_csv(const std::filesystem::path& path, const std::vector<AssetMeta>& meta) {
  auto out = csv::open_output(path);
  out << "id,name,asset_class,return_kind\n";
  for (const auto& m : meta)
    out << m.id << ',' << m.name << ',' << to_string(m.asset_class) << ',' << to_string(m.return_kind)
        << '\n';
}

void write_returns_csv(const std::filesystem::path& path, const ReturnsPanel& panel) {
  LevelsPanel as_table;
  as_table.dates = panel.dates;
  for (const auto& a : panel.assets) as_table.columns.push_back(a.name);
  as_table.values = panel.values;
  write_levels_csv(path, as_table);
}

ReturnsPanel load_returns(const std::filesystem::path& returns_csv,
                          const std::filesystem::path& meta_csv) {
  const auto table = load_levels(returns_csv);
  ReturnsPanel out;
  out.dates = table.dates;
  out.values = table.values;
  out.assets = align_meta(table, load_meta(meta_csv));
  out.validate();
  return out;
}

ReturnsPanel select_rows(const ReturnsPanel& panel, std::size_t begin, std::size_t end) {
  if (begin > end || end > panel.rows()) throw PreconditionError("select_rows: range out of bounds");
  ReturnsPanel out;
  out.assets = panel.assets;
  out.dates.assign(panel.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   panel.dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.values = panel.values.middleRows(static_cast<Eigen::Index>(begin),
                                       static_cast<Eigen::Index>(end - begin));
  return out;
}

}  // namespace macroregime
