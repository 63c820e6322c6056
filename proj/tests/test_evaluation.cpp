#include "eep/evaluation.hpp"
#include "eep/text_table.hpp"

#include "measurement_chain.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace eep {
namespace {

std::vector<Vec3> random_errors(int n, std::uint64_t seed) {
  std::mt19937 rng(static_cast<unsigned>(seed));
  std::normal_distribution<double> g(0.3, 2.0);
  std::vector<Vec3> e;
  for (int i = 0; i < n; ++i) e.emplace_back(g(rng), 0.5 * g(rng), 2.0 * g(rng));
  return e;
}

void expect_same(const ErrorReport& a, const ErrorReport& b, double tol) {
  EXPECT_LT((a.rms - b.rms).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT((a.sd - b.sd).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), tol);
  EXPECT_NEAR(a.rms_3d, b.rms_3d, tol);
  EXPECT_NEAR(a.sd_norm, b.sd_norm, tol);
  EXPECT_NEAR(a.sd_signed, b.sd_signed, tol);
  EXPECT_NEAR(a.mean_norm, b.mean_norm, tol);
}

TEST(Report, ConstantErrors) {
  const std::vector<Vec3> e(5, Vec3(1, 0, 0));
  const ErrorReport r = compute_report(e, "reported");
  EXPECT_DOUBLE_EQ(r.rms.x(), 1.0);
  EXPECT_DOUBLE_EQ(r.sd.x(), 0.0);
  EXPECT_DOUBLE_EQ(r.rms_3d, 1.0);
  EXPECT_DOUBLE_EQ(r.sd_norm, 0.0);
  EXPECT_EQ(r.count, 5u);
  EXPECT_EQ(r.source, "reported");
}

TEST(Report, TwoPointPopulationConvention) {
  const std::vector<Vec3> e{{1, 0, 0}, {-1, 0, 0}};
  const ErrorReport r = compute_report(e, "x");
  EXPECT_DOUBLE_EQ(r.rms.x(), 1.0);
  EXPECT_DOUBLE_EQ(r.sd.x(), 1.0);
  EXPECT_DOUBLE_EQ(r.sd_signed, 1.0);
  // Both magnitudes are 1, so the magnitude SD vanishes.
  EXPECT_DOUBLE_EQ(r.sd_norm, 0.0);
}

TEST(Report, NeedsTwoSamples) {
  const std::vector<Vec3> one{{1, 2, 3}};
  EXPECT_THROW(compute_report(one, "x"), std::invalid_argument);
}

TEST(Report, MatchesDirectFormulas) {
  const auto e = random_errors(500, 1);
  const ErrorReport r = compute_report(e, "x");
  const double n = static_cast<double>(e.size());
  for (int a = 0; a < 3; ++a) {
    double s = 0, sq = 0;
    for (const auto& v : e) {
      s += v(a);
      sq += v(a) * v(a);
    }
    const double mean = s / n;
    double var = 0;
    for (const auto& v : e) var += (v(a) - mean) * (v(a) - mean);
    EXPECT_NEAR(r.rms(a), std::sqrt(sq / n), 1e-12);
    EXPECT_NEAR(r.sd(a), std::sqrt(var / n), 1e-12);
    // Population identity: rms^2 = sd^2 + mean^2.
    EXPECT_NEAR(r.rms(a) * r.rms(a), r.sd(a) * r.sd(a) + r.mean(a) * r.mean(a), 1e-9);
  }
}

TEST(Report, PythagoreanIdentity) {
  for (int seed = 0; seed < 20; ++seed) {
    const ErrorReport r = compute_report(random_errors(100, seed), "x");
    EXPECT_NEAR(r.rms_3d * r.rms_3d, r.rms.squaredNorm(), 1e-9 * r.rms_3d * r.rms_3d);
  }
}

TEST(Report, PermutationInvariant) {
  auto e = random_errors(300, 2);
  const ErrorReport a = compute_report(e, "x");
  std::mt19937 rng(3);
  std::shuffle(e.begin(), e.end(), rng);
  expect_same(a, compute_report(e, "x"), 1e-12);
}

TEST(Report, ScalesLinearly) {
  auto e = random_errors(200, 4);
  const ErrorReport a = compute_report(e, "x");
  for (auto& v : e) v *= 2.5;
  const ErrorReport b = compute_report(e, "x");
  EXPECT_LT((b.rms - 2.5 * a.rms).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((b.sd - 2.5 * a.sd).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(b.rms_3d, 2.5 * a.rms_3d, 1e-12);
  EXPECT_NEAR(b.sd_norm, 2.5 * a.sd_norm, 1e-12);
  EXPECT_NEAR(b.sd_signed, 2.5 * a.sd_signed, 1e-12);
}

TEST(Improvement, BackSolvedPercentage) {
  ErrorReport before, after;
  before.count = after.count = 10;
  before.rms_3d = 6.1;
  after.rms_3d = 1.0;
  before.sd_signed = before.sd_norm = 2.0;
  after.sd_signed = after.sd_norm = 0.812;
  const Improvement i = improvement_summary(before, after);
  EXPECT_NEAR(i.rms_reduction_pct, 83.6, 0.05);
  EXPECT_NEAR(i.sd_reduction_pct, 59.4, 0.05);
}

TEST(Improvement, NoChangeIsZero) {
  const ErrorReport r = compute_report(random_errors(50, 5), "x");
  const Improvement i = improvement_summary(r, r);
  EXPECT_EQ(i.rms_reduction_pct, 0.0);
  EXPECT_EQ(i.sd_reduction_pct, 0.0);
}

TEST(Improvement, ErrorCases) {
  const std::vector<Vec3> zeros(4, Vec3::Zero());
  const ErrorReport z = compute_report(zeros, "x");
  EXPECT_THROW(improvement_summary(z, z), UndefinedImprovement);
  EXPECT_THROW(improvement_summary(compute_report(random_errors(4, 6), "a"), compute_report(random_errors(5, 7), "b")),
               std::invalid_argument);
}

TEST(Report, MeasurementChainPattern) {
  const auto chain = testing::run_measurement_chain(500, 0.5, 11);
  const ErrorReport ball = compute_report(chain.ball, "measurement");
  EXPECT_LT(ball.rms.maxCoeff(), 0.7);
  EXPECT_LT(ball.rms_3d, 1.1);
  EXPECT_LT(ball.rms.z(), std::min(ball.rms.x(), ball.rms.y()));
  EXPECT_LT(compute_report(chain.effector, "effector").rms_3d, ball.rms_3d);
}

TEST(ReportFile, ColumnsAndValues) {
  const auto dir = testing::scratch_dir("eval_files");
  const ErrorReport r = compute_report(random_errors(20, 8), "corrected");
  write_reports(dir / "r.txt", {r});
  const TextTable t = read_table(dir / "r.txt");
  EXPECT_EQ(t.header, (std::vector<std::string>{"source", "n", "rms_x", "rms_y", "rms_z", "rms_3d", "sd_x", "sd_y",
                                                "sd_z", "sd_3d_signed", "sd_3d_norm", "mean_x", "mean_y", "mean_z"}));
  EXPECT_EQ(t.text(0, "source"), "corrected");
  EXPECT_EQ(t.integer(0, "n"), 20);
  EXPECT_EQ(t.number(0, "rms_3d"), r.rms_3d);

  write_plot_data(dir / "p.txt", {{0.5, {1, 2, 3}, {4, 5, 6}, {7, 8, 9}}});
  const TextTable p = read_table(dir / "p.txt");
  EXPECT_EQ(p.header.size(), 10u);
  EXPECT_EQ(p.number(0, "corrected_z"), 9.0);
}

}  // namespace
}  // namespace eep
