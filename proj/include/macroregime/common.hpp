#pragma once

#include <chrono>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace macroregime {

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV, config, metadata).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A correlation is undefined because one input series is constant.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

/// A numerical routine (eigensolver, regression) failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Missing values ---------------------------------------------------------------

/// Sentinel for "value not available" in outputs (written as NaN in CSV).
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Dates ------------------------------------------------------------------------

/// Calendar date with ISO-8601 (YYYY-MM-DD) text form.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Throws ParseError on anything other than a valid YYYY-MM-DD.
  static Date parse(std::string_view text);

  std::chrono::sys_days days() const { return days_; }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  std::string to_string() const;

  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }
  bool is_weekend() const;

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

/// `count` consecutive weekdays starting at (or after) `first`.
std::vector<Date> business_days(Date first, std::size_t count);

// Diagnostics ------------------------------------------------------------------

/// Collects non-fatal warnings emitted by long-running stages.
class Diagnostics {
 public:
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void merge(const Diagnostics& other) {
    warnings_.insert(warnings_.end(), other.warnings_.begin(), other.warnings_.end());
  }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool empty() const { return warnings_.empty(); }
  void clear() { warnings_.clear(); }

 private:
  std::vector<std::string> warnings_;
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

// Row ranges -------------------------------------------------------------------

/// Half-open range of panel rows [begin, end).
struct RowSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

// Parallelism ------------------------------------------------------------------

/// Bounds OpenMP worker threads for subsequent parallel kernels (n <= 0 keeps the default).
void set_thread_count(int n);
int thread_count();

}  // namespace macroregime
