#include <doctest.h>

#include <cmath>
#include <string>

#include "macroregime/csv.hpp"
#include "macroregime/panel.hpp"
#include "test_support.hpp"

using namespace macroregime;

namespace {

std::vector<AssetMeta> meta_for(std::initializer_list<std::pair<const char*, ReturnKind>> cols,
                                AssetClass cls = AssetClass::equity) {
  std::vector<AssetMeta> out;
  int id = 1;
  for (const auto& [name, kind] : cols) out.push_back({id++, name, cls, kind});
  return out;
}

std::string what_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("panel") {

TEST_CASE("three dated rows parse into a 3x2 panel") {
  const auto p = parse_levels("date,a,b\n2020-01-02,1,2\n2020-01-03,3,4\n2020-01-06,5,6\n");
  CHECK(p.rows() == 3);
  CHECK(p.cols() == 2);
  CHECK(p.dates.front() == Date{2020, 1, 2});
  CHECK(p.dates.back() == Date{2020, 1, 6});
  CHECK(p.values(2, 1) == 6.0);
}

TEST_CASE("rows are sorted by date on load") {
  const auto p = parse_levels("date,a\n2020-01-06,3\n2020-01-02,1\n2020-01-03,2\n");
  CHECK(p.dates[0] == Date{2020, 1, 2});
  CHECK(p.values(0, 0) == 1.0);
  CHECK(p.values(2, 0) == 3.0);
}

TEST_CASE("duplicate date is rejected") {
  const auto msg = what_of([] { parse_levels("date,a\n2020-01-02,1\n2020-01-02,2\n"); });
  CHECK(msg.find("duplicate date") != std::string::npos);
}

TEST_CASE("blank cell is rejected with its location") {
  const auto msg = what_of([] { parse_levels("date,a,b\n2020-01-02,1,2\n2020-01-03,3,\n"); });
  CHECK(msg.find("'b'") != std::string::npos);
  CHECK(msg.find("missing value") != std::string::npos);
}

TEST_CASE("blank cells load as NaN when allowed") {
  CsvSchema s;
  s.allow_missing = true;
  const auto p = parse_levels("date,a,b\n2020-01-02,1,2\n2020-01-03,3,\n", s);
  CHECK(std::isnan(p.values(1, 1)));
}

TEST_CASE("malformed date and number are parse errors") {
  CHECK_THROWS_AS(parse_levels("date,a\n2020-13-02,1\n"), ParseError);
  CHECK_THROWS_AS(parse_levels("date,a\n2020-01-02,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_levels("date,a\n2020-01-02,1,2\n"), ParseError);
}

TEST_CASE("percent change return") {
  const auto lv = parse_levels("date,a\n2020-01-02,100\n2020-01-03,110\n");
  const auto r = to_returns(lv, meta_for({{"a", ReturnKind::percent_change}}));
  REQUIRE(r.rows() == 1);
  CHECK(r.values(0, 0) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(r.dates[0] == Date{2020, 1, 3});
}

TEST_CASE("simple difference return for an interest rate") {
  const auto lv = parse_levels("date,a\n2020-01-02,2.0\n2020-01-03,1.5\n");
  const auto r = to_returns(lv, meta_for({{"a", ReturnKind::simple_difference}}, AssetClass::interest_rate));
  CHECK(r.values(0, 0) == -0.5);
}

TEST_CASE("simple difference outside interest rates needs the override") {
  const auto lv = parse_levels("date,a\n2020-01-02,2.0\n2020-01-03,1.5\n");
  const auto meta = meta_for({{"a", ReturnKind::simple_difference}});
  CHECK_THROWS_AS(to_returns(lv, meta), PreconditionError);
  ReturnOptions o;
  o.allow_simple_difference_any_class = true;
  CHECK(to_returns(lv, meta, o).values(0, 0) == -0.5);
}

TEST_CASE("zero level under percent change fails at the second date") {
  const auto lv = parse_levels("date,a\n2020-01-02,100\n2020-01-03,0\n2020-01-06,50\n");
  const auto msg = what_of([&] { to_returns(lv, meta_for({{"a", ReturnKind::percent_change}})); });
  CHECK(msg.find("2020-01-03") != std::string::npos);
}

TEST_CASE("restrict_complete drops a gapped column") {
  CsvSchema s;
  s.allow_missing = true;
  const auto lv = parse_levels(
      "date,a,b,c\n2020-01-02,1,1,1\n2020-01-03,2,,2\n2020-01-06,3,3,3\n2020-01-07,4,4,4\n", s);
  Diagnostics d;
  const auto out = restrict_complete(lv, &d);
  CHECK(out.columns == std::vector<std::string>{"a", "c"});
  CHECK(out.rows() == 4);
  CHECK(d.warnings().size() == 1);
}

TEST_CASE("restrict_complete trims to the common observed range") {
  CsvSchema s;
  s.allow_missing = true;
  const auto lv = parse_levels("date,a,b\n2020-01-02,,1\n2020-01-03,2,2\n2020-01-06,3,3\n2020-01-07,4,\n", s);
  const auto out = restrict_complete(lv);
  CHECK(out.cols() == 2);
  CHECK(out.dates == std::vector<Date>{Date{2020, 1, 3}, Date{2020, 1, 6}});
}

TEST_CASE("restrict_complete on a complete panel is the identity") {
  const auto lv = parse_levels("date,a,b\n2020-01-02,1,5\n2020-01-03,2,6\n");
  const auto out = restrict_complete(lv);
  CHECK(out.dates == lv.dates);
  CHECK(out.columns == lv.columns);
  CHECK(out.values == lv.values);
}

TEST_CASE("restrict_complete with every column gapped fails") {
  CsvSchema s;
  s.allow_missing = true;
  const auto lv = parse_levels("date,a,b\n2020-01-02,1,5\n2020-01-03,,\n2020-01-06,3,3\n", s);
  CHECK_THROWS_AS(restrict_complete(lv), PreconditionError);
}

TEST_CASE("metadata parses and aligns by column name") {
  const auto meta = parse_meta("id,name,asset_class,return_kind\n7,b,commodity,percent_change\n"
                               "3,a,interest_rate,simple_difference\n");
  const auto lv = parse_levels("date,a,b\n2020-01-02,1,1\n2020-01-03,2,2\n");
  const auto aligned = align_meta(lv, meta);
  CHECK(aligned[0].id == 3);
  CHECK(aligned[0].asset_class == AssetClass::interest_rate);
  CHECK(aligned[1].id == 7);
  CHECK_THROWS_AS(parse_meta("id,name,asset_class,return_kind\n1,a,stocks,percent_change\n"), ParseError);
  CHECK_THROWS_AS(parse_meta("id,name,asset_class,return_kind\n1,a,equity,pct\n"), ParseError);
}

TEST_CASE("returns round-trip through CSV exactly") {
  const auto p = testing::noise_panel(30, 4, 11);
  testing::TempDir dir("panel");
  write_returns_csv(dir.path() / "r.csv", p);
  write_meta_csv(dir.path() / "m.csv", p.assets);
  const auto q = load_returns(dir.path() / "r.csv", dir.path() / "m.csv");
  CHECK(q.dates == p.dates);
  CHECK(q.values == p.values);
  CHECK(q.asset_ids() == p.asset_ids());
}

TEST_CASE("format_double round-trips") {
  testing::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    double back = 0;
    REQUIRE(csv::parse_double(csv::format_double(v), back));
    CHECK(back == v);
  }
}

TEST_CASE("validate enforces the panel invariants") {
  auto p = testing::noise_panel(5, 2, 1);
  CHECK_NOTHROW(p.validate());
  auto dup = p;
  dup.assets[1].id = dup.assets[0].id;
  CHECK_THROWS_AS(dup.validate(), PreconditionError);
  auto order = p;
  std::swap(order.dates[0], order.dates[1]);
  CHECK_THROWS_AS(order.validate(), PreconditionError);
  auto nan = p;
  nan.values(2, 1) = kMissing;
  CHECK_THROWS_AS(nan.validate(), PreconditionError);
}

}  // TEST_SUITE
