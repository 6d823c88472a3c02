#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "cgboost/error.hpp"
#include "cgboost/features/indicators.hpp"
#include "cgboost/features/normalizer.hpp"
#include "cgboost/features/windowing.hpp"
#include "cgboost/ndcore/rng.hpp"
#include "oracles.hpp"

namespace cgb::features {
namespace {

using namespace std::chrono;

SeriesFrame frame_from_close(const std::vector<double>& close) {
  SeriesFrame f;
  f.index_name = "test";
  f.macro_names = {"rate"};
  sys_days day = sys_days{year{2010} / January / 1};
  for (double c : close) {
    f.rows.push_back({year_month_day{day}, c, c, c, c, 1000.0, {0.03}});
    day += days{1};
  }
  return f;
}

SeriesFrame random_frame(std::size_t n, std::uint64_t seed) {
  nd::Rng rng(seed);
  SeriesFrame f;
  f.index_name = "rnd";
  f.macro_names = {"rate", "usd"};
  sys_days day = sys_days{year{2010} / January / 1};
  double c = 100;
  for (std::size_t t = 0; t < n; ++t) {
    const double open = c * (1 + 0.01 * rng.normal());
    c *= 1 + 0.01 * rng.normal();
    const double hi = std::max(open, c) * (1 + 0.005 * rng.uniform());
    const double lo = std::min(open, c) * (1 - 0.005 * rng.uniform());
    f.rows.push_back({year_month_day{day}, open, hi, lo, c, 1e6 * (1 + rng.uniform()), {rng.uniform(), rng.normal()}});
    day += days{1};
  }
  return f;
}

std::size_t col(const FeatureMatrix& fm, const std::string& name) {
  for (std::size_t i = 0; i < fm.cols(); ++i)
    if (fm.columns[i] == name) return i;
  throw std::out_of_range(name);
}

TEST(DateTest, ParseAndFormat) {
  EXPECT_EQ(format_date(parse_date("2016-09-30")), "2016-09-30");
  EXPECT_THROW(parse_date("2016-02-30"), DataError);
  EXPECT_THROW(parse_date("2016/02/03"), DataError);
  EXPECT_THROW(parse_date("16-02-03"), DataError);
}

TEST(SeriesFrameTest, ValidateRejectsBadRows) {
  SeriesFrame f = frame_from_close({10, 11, 12});
  EXPECT_NO_THROW(f.validate());
  f.rows[1].high = 5;
  try {
    f.validate();
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2010-01-02"), std::string::npos);
  }
  f = frame_from_close({10, 11, 12});
  f.rows[2].date = f.rows[1].date;
  EXPECT_THROW(f.validate(), DataError);
}

TEST(IndicatorTest, FlatSeriesIdentities) {
  const double c = 42.5;
  FeatureMatrix fm = compute_indicators(frame_from_close(std::vector<double>(300, c)));
  ASSERT_EQ(fm.rows(), 300 - kWarmupRows);
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    for (const char* name : {"ma5", "ma10", "ema20", "boll"}) EXPECT_NEAR(fm.features.at(r, col(fm, name)), c, 1e-12);
    for (const char* name : {"mtm6", "mtm12", "roc", "macd", "atr", "smi", "cci", "wvad"})
      EXPECT_NEAR(fm.features.at(r, col(fm, name)), 0.0, 1e-12) << name;
  }
}

TEST(IndicatorTest, RampMovingAverage) {
  std::vector<double> close(300);
  for (std::size_t t = 0; t < close.size(); ++t) close[t] = static_cast<double>(t + 1);
  const auto ma5 = ind::sma(close, 5);
  for (std::size_t t = 4; t < close.size(); ++t) EXPECT_NEAR(ma5[t], close[t] - 2.0, 1e-12);
  FeatureMatrix fm = compute_indicators(frame_from_close(close));
  for (std::size_t r = 0; r < fm.rows(); ++r) EXPECT_NEAR(fm.features.at(r, col(fm, "ma5")), fm.close[r] - 2.0, 1e-12);
  // Momentum over k months of 21 trading days on a unit ramp.
  EXPECT_NEAR(fm.features.at(0, col(fm, "mtm6")), 126.0, 1e-12);
  EXPECT_NEAR(fm.features.at(0, col(fm, "mtm12")), 252.0, 1e-12);
}

TEST(IndicatorTest, HandComputedSmallCases) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto e = ind::ema(v, 3);  // alpha = 0.5
  EXPECT_DOUBLE_EQ(e[1], 1.5);
  EXPECT_DOUBLE_EQ(e[3], 0.5 * 4 + 0.5 * (0.5 * 3 + 0.5 * 1.5));
  const std::vector<double> h{3, 4, 5}, l{1, 2, 1}, c{2, 3, 4};
  const auto a = ind::atr(h, l, c, 2);
  EXPECT_TRUE(std::isnan(a[0]));
  EXPECT_DOUBLE_EQ(a[1], 2.0);              // mean(2, max(2, 2, 1))
  EXPECT_DOUBLE_EQ(a[2], (2.0 + 4.0) / 2);  // TR = max(4, 2, 2)
  const auto r = ind::roc(v, 2);
  EXPECT_DOUBLE_EQ(r[2], 200.0);
}

TEST(IndicatorTest, TooShortSeriesNamesMinimum) {
  try {
    compute_indicators(frame_from_close(std::vector<double>(100, 1.0)));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("260"), std::string::npos);
  }
}

TEST(IndicatorTest, CausalUnderFuturePerturbation) {
  const SeriesFrame base = random_frame(400, 7);
  const FeatureMatrix ref = compute_indicators(base);
  nd::Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    SeriesFrame f = base;
    const std::size_t s = kWarmupRows + 1 + rng.below(400 - kWarmupRows - 1);
    SeriesRow& r = f.rows[s];
    const double k = 1.0 + rng.uniform(0.01, 0.2);
    r.open *= k;
    r.high *= k * 1.01;
    r.low *= k * 0.99;
    r.close *= k;
    r.volume *= 2;
    r.macro[0] += 1;
    const FeatureMatrix pert = compute_indicators(f);
    const std::size_t changed_row = s - kWarmupRows;
    for (std::size_t t = 0; t < changed_row; ++t)
      for (std::size_t c = 0; c < ref.cols(); ++c) ASSERT_EQ(pert.features.at(t, c), ref.features.at(t, c));
    bool any = false;
    for (std::size_t c = 0; c < ref.cols(); ++c) any |= pert.features.at(changed_row, c) != ref.features.at(changed_row, c);
    EXPECT_TRUE(any);
  }
}

FeatureMatrix single_column(std::vector<double> values) {
  FeatureMatrix fm;
  fm.columns = {"x"};
  sys_days day = sys_days{year{2011} / March / 1};
  for (double v : values) {
    fm.dates.push_back(year_month_day{day});
    fm.close.push_back(1.0);
    day += days{1};
  }
  const std::size_t n = values.size();
  fm.features = nd::Tensor({n, 1}, std::move(values));
  return fm;
}

TEST(NormalizerTest, UnitColumnIsIdentity) {
  FeatureMatrix fm = single_column({0.0, 0.25, 1.0, 0.5});
  Normalizer n = Normalizer::fit(fm, 0.0, 1.0);
  FeatureMatrix out = n.apply(fm);
  EXPECT_EQ(out.features, fm.features);
  EXPECT_TRUE(n.warnings().empty());
}

TEST(NormalizerTest, QuantileClipOnFourPointSample) {
  FeatureMatrix fm = single_column({0, 5, 10, 1000});
  Normalizer n = Normalizer::fit(fm, 0.0, 0.75);
  // Type-7 interpolation: position 0.75 * 3 = 2.25 -> 10 + 0.25 * 990.
  EXPECT_DOUBLE_EQ(n.columns()[0].clip_high, test::quantile_oracle({0, 5, 10, 1000}, 0.75));
  EXPECT_DOUBLE_EQ(n.columns()[0].clip_high, 257.5);
  FeatureMatrix out = n.apply(fm);
  EXPECT_EQ(out.features.at(3, 0), 1.0);
  EXPECT_EQ(out.features.at(0, 0), 0.0);
}

TEST(NormalizerTest, QuantileMatchesOracleOnRandomSamples) {
  nd::Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(1 + rng.below(50));
    for (double& x : v) x = rng.normal();
    const double q = rng.uniform();
    EXPECT_DOUBLE_EQ(empirical_quantile(v, q), test::quantile_oracle(v, q));
  }
}

TEST(NormalizerTest, ConstantColumnWarnsAndMapsToZero) {
  FeatureMatrix fm = single_column({3, 3, 3});
  Normalizer n = Normalizer::fit(fm, 0.005, 0.995);
  EXPECT_EQ(n.warnings().size(), 1u);
  EXPECT_EQ(n.columns()[0].scale, 1.0);
  const FeatureMatrix out = n.apply(fm);
  for (double v : out.features.data()) EXPECT_EQ(v, 0.0);
}

TEST(NormalizerTest, TrainRowsMapIntoUnitIntervalAndTestRowsClip) {
  FeatureMatrix fm = compute_indicators(random_frame(500, 3));
  FeatureMatrix train = fm.slice(0, 150), test_rows = fm.slice(150, fm.rows());
  Normalizer n = Normalizer::fit(train, 0.005, 0.995);
  for (const FeatureMatrix* part : {&train, &test_rows}) {
    const FeatureMatrix out = n.apply(*part);
    for (double v : out.features.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(n.stamp()->last, train.dates.back());
  EXPECT_EQ(n.transform(0, 1e12), 1.0);
}

TEST(NormalizerTest, InverseRoundTrip) {
  FeatureMatrix fm = compute_indicators(random_frame(400, 4));
  Normalizer n = Normalizer::fit(fm, 0.0, 1.0);
  for (std::size_t c = 0; c < fm.cols(); ++c) {
    const double v = fm.features.at(10, c);
    EXPECT_NEAR(n.inverse(c, n.transform(c, v)), v, 1e-12 * std::max(1.0, std::abs(v)));
  }
}

TEST(NormalizerTest, Errors) {
  Normalizer unfitted;
  EXPECT_THROW(unfitted.apply(single_column({1, 2})), UsageError);
  EXPECT_THROW(Normalizer::fit(single_column({1}), 0, 1), UsageError);
  EXPECT_THROW(Normalizer::fit(single_column({1, 2}), 0.6, 0.5), ConfigError);
}

TEST(WindowTest, Counting) {
  FeatureMatrix fm = single_column({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  auto samples = window_samples(fm, 4);
  EXPECT_EQ(samples.size(), 6u);
  for (const auto& s : samples) EXPECT_NE(s.row, fm.rows() - 1);
  EXPECT_EQ(window_inputs(fm, 4).size(), 7u);
  EXPECT_EQ(window_samples(fm, 1).size(), 9u);
  EXPECT_EQ(window_samples(fm, 1)[0].x.shape(), (nd::Shape{1, 1}));
  EXPECT_THROW(window_samples(fm, 11), DataError);
}

TEST(WindowTest, LayoutAndTarget) {
  FeatureMatrix fm = single_column({1, 2, 3, 4, 5});
  fm.close = {10, 11, 12, 13, 14};
  auto samples = window_samples(fm, 3);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].x.values(), (std::vector<double>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(samples[0].y_rate, (13.0 - 12.0) / 12.0);
  EXPECT_EQ(samples[0].close_today, 12.0);
  EXPECT_EQ(samples[0].date, fm.dates[2]);
}

}  // namespace
}  // namespace cgb::features
