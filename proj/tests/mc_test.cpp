#include "qcheck/mc.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qcheck/error.hpp"

namespace qcheck {
namespace {

TEST(Dgp, NoiseFreeSetups) {
  Rng rng(1);
  const Dataset d1 = draw_dataset({DgpFamily::setup1, 0.0, ErrorLaw::none, 50}, rng);
  EXPECT_EQ(d1.y, (1.0 + d1.w.array() + d1.x.col(0).array()).matrix());
  const Dataset d2 = draw_dataset({DgpFamily::setup1, 0.3, ErrorLaw::none, 50}, rng);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double w = d2.w(i), x = d2.x(i, 0);
    EXPECT_NEAR(d2.y(i), 1 + w + x + 0.3 * (w * w + w * x + x * x), 1e-12);
  }
  const Dataset d3 = draw_dataset({DgpFamily::setup2, 0.5, ErrorLaw::none, 50}, rng);
  for (Eigen::Index i = 0; i < 50; ++i)
    EXPECT_NEAR(d3.y(i), 0.5 * std::log(1 + d3.w(i) * d3.w(i) + d3.x(i, 0) * d3.x(i, 0)), 1e-12);
}

TEST(Dgp, BinomialCovariate) {
  Rng rng(2);
  const Dataset d = draw_dataset({DgpFamily::setup1, 0.0, ErrorLaw::gauss, 20000}, rng);
  EXPECT_GE(d.x.minCoeff(), 0.0);
  EXPECT_LE(d.x.maxCoeff(), 5.0);
  EXPECT_NEAR(d.x.mean(), 2.5, 0.04);
  const double var = (d.x.array() - d.x.mean()).square().mean();
  EXPECT_NEAR(var, 1.25, 0.05);
  EXPECT_NEAR(d.w.mean(), 0.0, 0.03);
  for (Eigen::Index i = 0; i < 100; ++i) EXPECT_EQ(d.x(i, 0), std::round(d.x(i, 0)));
}

TEST(Dgp, CenteredLognormalMedian) {
  Rng rng(3);
  std::vector<double> e(100000);
  for (double& v : e) v = draw_error(ErrorLaw::lognorm_centered, 0.0, rng);
  std::nth_element(e.begin(), e.begin() + 50000, e.end());
  EXPECT_NEAR(e[50000], 0.0, 0.02);
}

TEST(Dgp, HeteroscedasticSliceVariance) {
  Rng rng(4);
  const Dataset d = draw_dataset({DgpFamily::setup1, 0.0, ErrorLaw::hetero_gauss, 100000}, rng);
  double s2 = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d.w(i)) < 0.05) {
      const double e = d.y(i) - 1 - d.w(i) - d.x(i, 0);
      s2 += e * e;
      ++count;
    }
  ASSERT_GT(count, 2000);
  EXPECT_NEAR(s2 / count, 0.5, 0.05);
}

TEST(Dgp, Validation) {
  Rng rng(5);
  EXPECT_THROW(draw_dataset({DgpFamily::setup1, 0.0, ErrorLaw::gauss, 5}, rng), ConfigError);
  EXPECT_THROW(draw_dataset({DgpFamily::setup1, -0.1, ErrorLaw::gauss, 50}, rng), ConfigError);
  EXPECT_EQ(parse_error_law("hetero_gauss"), ErrorLaw::hetero_gauss);
  EXPECT_THROW(parse_dgp_family("setup3"), ConfigError);
}

LevelStudyConfig small_level() {
  LevelStudyConfig cfg;
  cfg.error_laws = {ErrorLaw::gauss, ErrorLaw::hetero_gauss};
  cfg.c_grid = {1.0, 2.0};
  cfg.n = 40;
  cfg.reps = 12;
  cfg.replications = 19;
  cfg.seed = 21;
  return cfg;
}

PowerStudyConfig small_power() {
  PowerStudyConfig cfg;
  cfg.delta_setup1 = {0.0, 0.2};
  cfg.delta_setup2 = {1.0};
  cfg.error_laws = {ErrorLaw::gauss};
  cfg.c_grid = {0.5, 2.0};
  cfg.n = 40;
  cfg.reps = 10;
  cfg.replications = 19;
  cfg.seed = 22;
  return cfg;
}

std::string csv(const McResult& r) {
  std::ostringstream out;
  write_mc_csv(out, r);
  return out.str();
}

TEST(Level, RowsAndInvariants) {
  const McResult r = run_level_study(small_level());
  // 2 laws x (3 schemes + asymptotic) x 2 c
  EXPECT_EQ(r.rows.size(), 16u);
  for (const auto& row : r.rows) {
    EXPECT_GE(row.rejection_rate, 0.0);
    EXPECT_LE(row.rejection_rate, 1.0);
    EXPECT_DOUBLE_EQ(row.mc_std_error, std::sqrt(row.rejection_rate * (1 - row.rejection_rate) / row.reps));
    EXPECT_EQ(row.study, "level");
    EXPECT_EQ(row.n, 40);
  }
  EXPECT_NO_THROW(r.find("level", DgpFamily::setup1, ErrorLaw::hetero_gauss, Method::mlp, "naive", 2.0, 0.0));
  EXPECT_THROW(r.find("level", DgpFamily::setup1, ErrorLaw::gauss, Method::mlp, "wild", 4.0, 0.0), ConfigError);
}

TEST(Level, DeterministicAcrossWorkers) {
  LevelStudyConfig cfg = small_level();
  const std::string a = csv(run_level_study(cfg));
  cfg.threads = 3;
  EXPECT_EQ(csv(run_level_study(cfg)), a);
}

TEST(Power, DeterministicAndCellsRecomputable) {
  PowerStudyConfig cfg = small_power();
  const McResult full = run_power_study(cfg);
  // per cell: mlp x 2 c, zheng x 2 c, hz
  EXPECT_EQ(full.rows.size(), 3u * 5u);
  cfg.threads = 4;
  EXPECT_EQ(csv(run_power_study(cfg)), csv(full));

  PowerStudyConfig one = small_power();
  one.families = {DgpFamily::setup1};
  one.delta_setup1 = {0.2};
  one.methods = {Method::hz};
  const McResult cell = run_power_study(one);
  ASSERT_EQ(cell.rows.size(), 1u);
  const auto& expected = full.find("power", DgpFamily::setup1, ErrorLaw::gauss, Method::hz, "wild", 0.0, 0.2);
  EXPECT_EQ(cell.rows[0].rejection_rate, expected.rejection_rate);
  EXPECT_TRUE(std::isnan(cell.rows[0].c));
}

TEST(Output, CsvAndPlotData) {
  McResult r;
  r.rows.push_back({"power", DgpFamily::setup2, ErrorLaw::gauss, Method::hz, "wild",
                    std::numeric_limits<double>::quiet_NaN(), 0.5, 100, 4, 0.25, std::sqrt(0.25 * 0.75 / 4)});
  const std::string text = csv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "study,dgp,error_law,method,scheme,c,delta,n,reps,rejection_rate,mc_std_error");
  EXPECT_NE(text.find("power,setup2,gauss,hz,wild,,0.5,100,4,0.25,"), std::string::npos);
  std::ostringstream plot;
  write_plot_data(plot, r);
  EXPECT_NE(plot.str().find("power:setup2:gauss:hz:wild,"), std::string::npos);
  EXPECT_NE(plot.str().find(",delta,0.5,0.25,0,"), std::string::npos);
}

}  // namespace
}  // namespace qcheck
