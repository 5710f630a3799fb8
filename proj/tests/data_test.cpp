#include "qcheck/data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qcheck/error.hpp"

namespace qcheck {
namespace {

Dataset parse(const std::string& text, const std::string& w = "w") {
  std::istringstream in(text);
  return read_csv(in, {w, "y"});
}

TEST(Csv, ThreeRows) {
  const Dataset d = parse("y,w,x1\n1,0.5,2\n2,1.5,3e0\n-3,2.5,4\n");
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.num_x(), 1);
  EXPECT_EQ(d.x_names, std::vector<std::string>{"x1"});
  EXPECT_EQ(d.y(2), -3.0);
  EXPECT_EQ(d.w(1), 1.5);
  EXPECT_EQ(d.x(1, 0), 3.0);
}

TEST(Csv, ColumnOrderAndNames) {
  const Dataset d = parse("a,age,y,b\n1,30,5,0\n2,31,6,1\n", "age");
  EXPECT_EQ(d.w_name, "age");
  EXPECT_EQ(d.x_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.w(1), 31.0);
  EXPECT_EQ(d.x(1, 1), 1.0);
}

TEST(Csv, ConstantWIsDegenerate) {
  try {
    parse("y,w\n1,2\n3,2\n4,2\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate W"), std::string::npos);
  }
}

TEST(Csv, NanCellReportsCoordinates) {
  try {
    parse("y,w,x1\n1,2,3\n4,NaN,6\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos);
    EXPECT_NE(msg.find("column 2"), std::string::npos);
  }
}

TEST(Csv, MissingColumnIsConfigError) {
  EXPECT_THROW(parse("y,v\n1,2\n3,4\n"), ConfigError);
  std::istringstream in("resp,w\n1,2\n3,4\n");
  EXPECT_THROW(read_csv(in, {"w", "y"}), ConfigError);
}

TEST(Csv, TooFewRows) { EXPECT_THROW(parse("y,w\n1,2\n"), DataError); }

TEST(Csv, RoundTripIsExact) {
  Rng rng(9);
  Dataset d = oracle::random_dataset(40, 3, rng);
  d.y(0) = 1e-300;
  d.w(1) = -123456789.123456789;
  std::ostringstream out;
  write_csv(out, d);
  const Dataset back = parse(out.str());
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.w, d.w);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.x_names, d.x_names);
}

TEST(Standardize, TwoPointExample) {
  const Dataset d = parse("y,w\n5,0\n7,2\n");
  const auto [s, report] = standardize(d);
  EXPECT_NEAR(s.w(0), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.w(1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(s.y, d.y);
  ASSERT_EQ(report.columns.size(), 1u);
  EXPECT_EQ(report.columns[0].mean, 1.0);
  EXPECT_NEAR(report.columns[0].sd, std::sqrt(2.0), 1e-15);
}

TEST(Standardize, MomentsAndIdempotence) {
  Rng rng(4);
  const Dataset d = oracle::random_dataset(57, 4, rng);
  const Dataset s = standardize(d).first;
  const auto check = [](const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  };
  check(s.w);
  for (Eigen::Index k = 0; k < s.num_x(); ++k) check(s.x.col(k));
  const Dataset s2 = standardize(s).first;
  EXPECT_LE((s2.w - s.w).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((s2.x - s.x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, ConstantColumnNamed) {
  const Dataset d = parse("y,w,five\n1,0,5\n2,1,5\n3,2,5\n");
  try {
    standardize(d);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("five"), std::string::npos);
  }
}

TEST(Dataset, ColumnLookup) {
  const Dataset d = parse("y,w,x1\n1,0.5,2\n2,1.5,3\n");
  EXPECT_EQ(d.column("w"), d.w);
  EXPECT_EQ(d.column("x1"), d.x.col(0));
  EXPECT_THROW(d.column("nope"), ConfigError);
}

}  // namespace
}  // namespace qcheck
