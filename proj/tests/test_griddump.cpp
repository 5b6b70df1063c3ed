#include <gtest/gtest.h>

#include <random>

#include <solitonforge/dressing.hpp>
#include <solitonforge/griddump.hpp>

using namespace solitonforge;

namespace {

GridDump awkward_dump() {
  GridDump d;
  d.meta = {"soliton", {{"m", 1}, {"zs", {0.1, 1.0 / 3.0}}}, "su", {-1.0 / 3.0, 2.0, 3}, {0.0, 0.1, 2}};
  d.dim = 2;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 6; ++k) {
    Matrix m(2, 2);
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = cplx(U(rng) * std::pow(10.0, 4 * U(rng)), U(rng) * 1e-300);
    d.values.push_back(m);
  }
  d.values[0](0, 0) = cplx(5e-324, -0.0);
  d.values[1](1, 1) = cplx(std::numeric_limits<double>::max(), 0.1 + 0.2);
  d.aux["energy"] = {1.0 / 7, 2.0 / 7, 3.0 / 7, 4.0 / 7, 5.0 / 7, 6.0 / 7};
  d.results["first_blowup"] = nullptr;
  return d;
}

}  // namespace

TEST(Axis, Parse) {
  EXPECT_EQ(parse_axis("-1.5:2:7"), (Axis{-1.5, 2.0, 7}));
  EXPECT_EQ(parse_axis("0:0:1").at(0), 0.0);
  Axis a = parse_axis("0:1:5");
  EXPECT_DOUBLE_EQ(a.at(4), 1.0);
  EXPECT_DOUBLE_EQ(a.at(2), 0.5);
  for (const char* bad : {"", "1:2", "1:2:3:4", "a:b:3", "0:1:0", "0:1:3x", "nan:1:3", "0:inf:3"})
    EXPECT_THROW(parse_axis(bad), PreconditionViolation) << bad;
}

TEST(Axis, ParseGrid) {
  auto [x, t] = parse_grid("-10:10:41,0:3:21");
  EXPECT_EQ(x, (Axis{-10, 10, 41}));
  EXPECT_EQ(t, (Axis{0, 3, 21}));
  EXPECT_THROW(parse_grid("-10:10:41"), PreconditionViolation);
  EXPECT_THROW(parse_grid("-10:10:41,junk"), PreconditionViolation);
}

TEST(Json, BitExactRoundTrip) {
  auto d = awkward_dump();
  auto back = load_json(dump_json(d));
  EXPECT_TRUE(back == d);
  EXPECT_EQ(dump_json(back), dump_json(d));
  EXPECT_TRUE(std::signbit(back.values[0](0, 0).imag()));
}

TEST(Json, Layout) {
  auto j = nlohmann::json::parse(dump_json(awkward_dump()));
  EXPECT_EQ(j["schema"], "solitonforge/1");
  EXPECT_EQ(j["meta"]["nx"], 3);
  ASSERT_EQ(j["values"].size(), 2u);
  ASSERT_EQ(j["values"][0].size(), 3u);
  EXPECT_EQ(j["values"][1][2][0][1].size(), 2u);
  EXPECT_TRUE(j["first_blowup"].is_null());
}

TEST(Json, RejectsMalformed) {
  auto j = nlohmann::json::parse(dump_json(awkward_dump()));
  auto wrong_schema = j;
  wrong_schema["schema"] = "other/9";
  EXPECT_THROW(grid_from_json(wrong_schema), PreconditionViolation);
  auto short_rows = j;
  short_rows["values"].erase(1);
  EXPECT_THROW(grid_from_json(short_rows), ShapeMismatch);
  auto ragged = j;
  ragged["values"][0][0][0].erase(1);
  EXPECT_THROW(grid_from_json(ragged), ShapeMismatch);
}

TEST(Csv, HeaderAndRows) {
  auto d = awkward_dump();
  auto text = dump_csv(d);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# schema: solitonforge/1");
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (line[0] != '#') rows.push_back(line);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "x,t,re00,im00,re01,im01,re10,im10,re11,im11,energy");
  EXPECT_NE(text.find("# first_blowup: null"), std::string::npos);
  // every number is written at full precision
  std::istringstream r(rows[3]);
  std::string cell;
  std::vector<double> cells;
  while (std::getline(r, cell, ',')) cells.push_back(std::stod(cell));
  ASSERT_EQ(cells.size(), 11u);
  EXPECT_EQ(cells[0], 2.0);
  EXPECT_EQ(cells[2], d.value(0, 2)(0, 0).real());
  EXPECT_EQ(cells[10], 3.0 / 7);
}

TEST(SampleGrid, VacuumValues) {
  auto a = ConjugatedDiagonal::diagonal({kI, -kI});
  auto d = sample_grid(to_wavemap(vacuum_solution(a)), {0, 1, 4}, {-1, 1, 3}, "vacuum", {});
  EXPECT_EQ(d.meta.target_class, "su");
  ASSERT_EQ(d.values.size(), 12u);
  for (int it = 0; it < 3; ++it)
    for (int ix = 0; ix < 4; ++ix) {
      // s = E(-1) E(1)^{-1} = exp(-2 a (xi + eta)) = exp(-2 a x)
      const double x = d.meta.x.at(ix);
      EXPECT_LE((d.value(it, ix) - mat_exp(a, -2 * x)).norm(), 1e-13);
    }
  EXPECT_TRUE(load_json(dump_json(d)) == d);
}
