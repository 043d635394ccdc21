#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thzrefl/data.hpp"
#include "thzrefl/evalcmp.hpp"
#include "thzrefl/rng.hpp"
#include "thzrefl/wftrend.hpp"

using namespace thzrefl;

namespace {

Dataset tiny_test_set() {
  Dataset ds;
  ds.thickness_m = 0.001;
  ds.samples = {{300.0, 10.0, 0.1}, {310.0, 10.0, 0.2}, {300.0, 20.0, 0.3}, {310.0, 20.0, 0.4}};
  return ds;
}

Predictor offset(double d) {
  return [d](const MeasurementSample& s) { return s.gamma + d; };
}

}  // namespace

TEST(Rmse, Examples) {
  const std::vector<double> t{0.5, 0.1, 0.7, 0.3};
  EXPECT_EQ(rmse(t, t), 0.0);
  std::vector<double> p = t;
  for (double& x : p) x += 0.01;
  EXPECT_NEAR(rmse(p, t), 0.01, 1e-15);
  const std::vector<double> zeros(4, 0.0);
  const std::vector<double> errs{0.1, 0.2, 0.2, 0.3};
  EXPECT_NEAR(rmse(errs, zeros), std::sqrt(0.18 / 4.0), 1e-15);
  EXPECT_NEAR(rmse(errs, zeros), 0.21213203435596426, 1e-15);
}

TEST(Rmse, SquareIsMeanSquaredError) {
  const CounterRng rng(4);
  std::vector<double> p(257), t(257);
  double ss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.uniform(2 * i);
    t[i] = rng.uniform(2 * i + 1);
    ss += (p[i] - t[i]) * (p[i] - t[i]);
  }
  const double r = rmse(p, t);
  EXPECT_NEAR(r * r, ss / 257.0, 1e-14);
}

TEST(Rmse, LengthErrors) {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(rmse(a, b), LengthMismatchError);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), LengthMismatchError);
  EXPECT_THROW(abs_error_cdf(a, b), LengthMismatchError);
  EXPECT_THROW(abs_error_cdf(std::vector<double>{}, std::vector<double>{}), LengthMismatchError);
}

TEST(ErrorCdf, ConstantErrorIsAStep) {
  const std::vector<double> t(8, 0.5), p(8, 0.53);
  const ErrorCdf cdf = abs_error_cdf(p, t);
  for (double e : cdf.errors) EXPECT_NEAR(e, 0.03, 1e-15);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(cdf.probabilities[i], (i + 0.5) / 8.0);
}

TEST(ErrorCdf, SortedAndStrictlyIncreasing) {
  const std::vector<double> t{0.0, 0.0, 0.0, 0.0}, p{0.3, -0.1, 0.2, -0.05};
  const ErrorCdf cdf = abs_error_cdf(p, t);
  EXPECT_EQ(cdf.errors, (std::vector<double>{0.05, 0.1, 0.2, 0.3}));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GT(cdf.probabilities[i], cdf.probabilities[i - 1]);
  EXPECT_LT(cdf.probabilities.back(), 1.0);
}

TEST(ErrorCdf, UniformErrorsGiveLinearCdf) {
  // Kolmogorov-Smirnov distance to the uniform CDF; the 1% critical value
  // for n = 4000 is about 1.63 / sqrt(n).
  const CounterRng rng(21);
  const std::size_t n = 4000;
  std::vector<double> p(n), t(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(i);
  const ErrorCdf cdf = abs_error_cdf(p, t);
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) ks = std::max(ks, std::abs(cdf.probabilities[i] - cdf.errors[i]));
  EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST(ConfidenceBound, OrderStatistics) {
  const std::vector<double> zeros10(10, 0.0), twos(10, 0.02);
  EXPECT_EQ(confidence_bound(abs_error_cdf(twos, zeros10), 0.9), 0.02);

  std::vector<double> p(100), t(100, 0.0);
  for (int i = 0; i < 100; ++i) p[static_cast<std::size_t>(i)] = 0.001 * (i + 1);
  const ErrorCdf cdf = abs_error_cdf(p, t);
  EXPECT_DOUBLE_EQ(confidence_bound(cdf, 0.9), 0.090);
  EXPECT_DOUBLE_EQ(confidence_bound(cdf, 0.905), 0.091);
  EXPECT_DOUBLE_EQ(confidence_bound(cdf, 0.001), 0.001);

  double prev = 0.0;
  for (double level = 0.01; level < 1.0; level += 0.01) {
    const double b = confidence_bound(cdf, level);
    EXPECT_GE(b, prev);
    prev = b;
  }
  EXPECT_THROW(confidence_bound(cdf, 0.0), DomainError);
  EXPECT_THROW(confidence_bound(cdf, 1.0), DomainError);
}

TEST(ConfidenceBound, GaussianNoiseQuantile) {
  // Truth-parameter predictions against noisy glass data: |error| is |N(0, s)|,
  // whose 90% quantile is 1.645 s.
  const auto& glass = builtin_material("Glass");
  const Dataset ds = synthesize_dataset(glass, glass.thickness_m, default_frequency_grid(),
                                        default_angle_grid(), 0.01, 1);
  const SplitResult split = stratified_split(ds, 0.6, 1);
  const auto truth = [&](const MeasurementSample& s) {
    return sli_epld({s.f_ghz, s.theta_deg, glass.thickness_m}, trend_to_subband(glass.trend, s.f_ghz));
  };
  const ComparisonReport r = compare_models(split.test, {{"truth", truth}});
  ASSERT_TRUE(r.rows[0].ok);
  EXPECT_NEAR(r.rows[0].bound, 1.645 * 0.01, 0.15 * 1.645 * 0.01);
  EXPECT_NEAR(r.rows[0].rmse, 0.01, 0.001);
}

TEST(CompareModels, PerfectPredictorAndOrdering) {
  const Dataset ds = tiny_test_set();
  const ComparisonReport r =
      compare_models(ds, {{"b", offset(0.1)}, {"perfect", offset(0.0)}, {"a", offset(-0.05)}});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].name, "b");
  EXPECT_EQ(r.rows[1].name, "perfect");
  EXPECT_EQ(r.rows[2].name, "a");
  EXPECT_EQ(r.rows[1].rmse, 0.0);
  EXPECT_EQ(r.rows[1].bound, 0.0);
  EXPECT_EQ(r.rows[1].count, 4u);
  EXPECT_NEAR(r.rows[0].rmse, 0.1, 1e-15);
  EXPECT_NEAR(r.rows[2].bound, 0.05, 1e-15);
  ASSERT_EQ(r.rows[0].rmse_by_angle.size(), 2u);
  EXPECT_NEAR(r.rows[0].rmse_by_angle.at(20.0), 0.1, 1e-15);
}

TEST(CompareModels, MetricsRecomputableFromPredictions) {
  const Dataset ds = tiny_test_set();
  auto wobble = [](const MeasurementSample& s) { return s.gamma * 1.1 - 0.01; };
  const ComparisonReport r = compare_models(ds, {{"w", wobble}});
  EXPECT_EQ(r.rows[0].rmse, rmse(r.rows[0].predictions, r.truths));
  EXPECT_EQ(r.rows[0].bound, confidence_bound(abs_error_cdf(r.rows[0].predictions, r.truths), 0.9));
}

TEST(CompareModels, PermutationInvariant) {
  const Dataset ds = tiny_test_set();
  const ComparisonReport a = compare_models(ds, {{"x", offset(0.02)}, {"y", offset(-0.3)}});
  const ComparisonReport b = compare_models(ds, {{"y", offset(-0.3)}, {"x", offset(0.02)}});
  EXPECT_EQ(a.rows[0].rmse, b.rows[1].rmse);
  EXPECT_EQ(a.rows[1].rmse, b.rows[0].rmse);
  EXPECT_EQ(a.rows[0].bound, b.rows[1].bound);
  EXPECT_EQ(a.rows[1].predictions, b.rows[0].predictions);
}

TEST(CompareModels, FailingPredictorIsIsolated) {
  const Dataset ds = tiny_test_set();
  auto boom = [](const MeasurementSample&) -> double { throw std::runtime_error("boom"); };
  const ComparisonReport r = compare_models(ds, {{"bad", boom}, {"good", offset(0.0)}});
  EXPECT_FALSE(r.rows[0].ok);
  EXPECT_EQ(r.rows[0].error, "boom");
  EXPECT_TRUE(r.rows[1].ok);
  EXPECT_EQ(r.rows[1].rmse, 0.0);
  EXPECT_THROW(compare_models(ds, {}), DomainError);
  EXPECT_THROW(compare_models(Dataset{}, {{"good", offset(0.0)}}), IngestionError);
}

TEST(CompareModels, EpldBeatsEmpiricalOnEpldData) {
  const auto& concrete = builtin_material("Concrete");
  const double d = concrete.thickness_m;
  const Dataset ds = synthesize_dataset(concrete, d, default_frequency_grid(),
                                        default_angle_grid(), 0.0, 1);
  const SplitResult split = stratified_split(ds, 0.6, 1);
  const std::span<const MeasurementSample> train(split.train.samples);
  const EpldModel epld{MaterialClass::NonMetal, d, kTHz};
  const EmpiricalModel emp{d, kTHz};
  const LogTrend t_epld = wf_trend(train, epld).trend;
  const LogTrend t_emp = wf_trend(train, emp).trend;
  const ComparisonReport r = compare_models(
      split.test,
      {{"epld", [&](const MeasurementSample& s) { return predict_trend(epld, t_epld, s.f_ghz, s.theta_deg); }},
       {"empirical", [&](const MeasurementSample& s) { return predict_trend(emp, t_emp, s.f_ghz, s.theta_deg); }}});
  ASSERT_TRUE(r.rows[0].ok);
  ASSERT_TRUE(r.rows[1].ok);
  EXPECT_LT(r.rows[0].rmse, r.rows[1].rmse);
}

TEST(ReportExport, JsonTextCsv) {
  const Dataset ds = tiny_test_set();
  auto boom = [](const MeasurementSample&) -> double { throw std::runtime_error("nope"); };
  const ComparisonReport r = compare_models(ds, {{"offset", offset(0.1)}, {"bad", boom}});
  const nlohmann::json j = report_to_json(r);
  EXPECT_EQ(j["schema"], "thzrefl-report/1");
  EXPECT_EQ(j["samples"], 4);
  EXPECT_EQ(j["models"][0]["name"], "offset");
  EXPECT_DOUBLE_EQ(j["models"][0]["rmse"].get<double>(), r.rows[0].rmse);
  EXPECT_EQ(j["models"][0]["rmse_by_angle"].size(), 2u);
  EXPECT_EQ(j["models"][1]["ok"], false);
  EXPECT_EQ(j["models"][1]["error"], "nope");

  const std::string text = report_to_text(r);
  EXPECT_NE(text.find("bound90"), std::string::npos);
  EXPECT_NE(text.find("0.100000"), std::string::npos);
  EXPECT_NE(text.find("failed: nope"), std::string::npos);

  const std::string csv = cdf_to_csv(abs_error_cdf(r.rows[0].predictions, r.truths));
  EXPECT_NE(csv.find("abs_error,probability\n"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}
