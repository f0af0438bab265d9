#include "macroregime/common.hpp"

#include <charconv>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace macroregime {

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw PreconditionError("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
  auto fail = [&]() -> Date {
    throw ParseError("unparseable date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return fail();
  int y = 0;
  unsigned m = 0, d = 0;
  const char* p = text.data();
  if (std::from_chars(p, p + 4, y).ptr != p + 4) return fail();
  if (std::from_chars(p + 5, p + 7, m).ptr != p + 7) return fail();
  if (std::from_chars(p + 8, p + 10, d).ptr != p + 10) return fail();
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return fail();
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::to_string() const {
  const auto v = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
  return buf;
}

bool Date::is_weekend() const {
  const std::chrono::weekday wd{days_};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

std::vector<Date> business_days(Date first, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  Date d = first;
  while (out.size() < count) {
    if (!d.is_weekend()) out.push_back(d);
    d = d.plus_days(1);
  }
  return out;
}

void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace macroregime
