#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iivds/error.hpp"
#include "iivds/error_analysis.hpp"
#include "support.hpp"

namespace iivds {
namespace {

using testing::count_at_or_above;
using testing::count_below;
using testing::histogram_of;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Input;
}

TEST(Histogram, EdgesAndRecord) {
  ScoreHistogram h(ScoreKind::Genuine);
  h.record(0.0);
  h.record(1.0);
  h.record(0.3725);
  h.record(0.55);
  EXPECT_EQ(h.counts()[0], 1U);
  EXPECT_EQ(h.counts()[9999], 1U);
  EXPECT_EQ(h.counts()[3725], 1U);
  EXPECT_EQ(h.counts()[5500], 1U);
  EXPECT_EQ(h.total(), 4U);
  EXPECT_EQ(kind_of([&] { h.record(1.0000001); }), ErrorKind::Input);
  EXPECT_EQ(kind_of([&] { h.record(-0.1); }), ErrorKind::Input);
  EXPECT_EQ(kind_of([&] { h.record(std::nan("")); }), ErrorKind::Input);
}

TEST(Histogram, EveryEdgeLandsInItsOwnBin) {
  for (std::uint32_t bins : {7U, 100U, 10000U}) {
    for (std::uint32_t i = 0; i < bins; ++i) {
      const double edge = static_cast<double>(i) / bins;
      ASSERT_EQ(ScoreHistogram::bin_of(edge, bins), i) << bins << " " << i;
      const double below = std::nextafter(edge, -1.0);
      if (i > 0) ASSERT_EQ(ScoreHistogram::bin_of(below, bins), i - 1) << bins << " " << i;
    }
  }
}

TEST(Histogram, DecimalThresholdsOnEdges) {
  // Printed decimals such as 0.3725 must land on edge 3725 even though the
  // double nearest 0.3725 sits slightly off it.
  for (double t : {0.3725, 0.55, 0.475, 0.525, 0.1, 0.3, 0.7}) {
    const auto bin = ScoreHistogram::bin_of(t, 10000);
    EXPECT_EQ(bin, static_cast<std::uint32_t>(std::lround(t * 10000))) << t;
  }
}

TEST(Merge, MonoidLaws) {
  RngStream rng(1, StreamDomain::Test, 10);
  const auto a = histogram_of(ScoreKind::Imposter, testing::uniform_scores(rng, 500, 0, 1), 100);
  const auto b = histogram_of(ScoreKind::Imposter, testing::uniform_scores(rng, 300, 0, 1), 100);
  const auto c = histogram_of(ScoreKind::Imposter, testing::uniform_scores(rng, 200, 0, 1), 100);
  const ScoreHistogram empty(ScoreKind::Imposter, 100);
  EXPECT_EQ(merge(a, empty), a);
  EXPECT_EQ(merge(a, b), merge(b, a));
  EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
  EXPECT_EQ(merge(a, b).total(), 800U);
}

TEST(Merge, SingleScoresTallyDirectly) {
  ScoreHistogram x(ScoreKind::Genuine), y(ScoreKind::Genuine), z(ScoreKind::Genuine);
  x.record(0.1);
  y.record(0.1);
  z.record(0.9);
  const auto left = merge(merge(x, y), z);
  const auto right = merge(x, merge(y, z));
  EXPECT_EQ(left, right);
  EXPECT_EQ(left.counts()[1000], 2U);
  EXPECT_EQ(left.counts()[9000], 1U);
}

TEST(Merge, MismatchIsSchemaError) {
  ScoreHistogram g(ScoreKind::Genuine), i(ScoreKind::Imposter), small(ScoreKind::Genuine, 10);
  EXPECT_EQ(kind_of([&] { merge(g, i); }), ErrorKind::Schema);
  EXPECT_EQ(kind_of([&] { merge(g, small); }), ErrorKind::Schema);
}

TEST(HistogramFile, RoundTripAndErrors) {
  ScoreHistogram h(ScoreKind::Imposter, 50);
  h.record(0.25);
  h.add_to_bin(49, 7);
  const auto bytes = serialize_histogram(h);
  EXPECT_EQ(bytes.size(), 4U + 2 + 1 + 4 + 50 * 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "IIVH");
  EXPECT_EQ(bytes[6], 1);
  EXPECT_EQ(deserialize_histogram(bytes), h);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_EQ(kind_of([&] { deserialize_histogram(truncated); }), ErrorKind::Schema);

  const auto dir = std::filesystem::temp_directory_path() / "iivds_hist_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "genuine.hist";
  std::ofstream(path, std::ios::binary) << "garbage";
  try {
    read_histogram(path);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("genuine.hist"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(FarFrr, DirectCountExample) {
  const std::vector<double> imp = {0.1, 0.2, 0.3, 0.5};
  const std::vector<double> gen = {0.6, 0.7};
  const auto c = far_frr(histogram_of(ScoreKind::Genuine, gen),
                         histogram_of(ScoreKind::Imposter, imp));
  EXPECT_DOUBLE_EQ(c.far[4000], 0.25);
  EXPECT_DOUBLE_EQ(c.frr[4000], 0.0);
  EXPECT_DOUBLE_EQ(c.far[0], 1.0);
  EXPECT_DOUBLE_EQ(c.frr[0], 0.0);
  EXPECT_EQ(c.grid.size(), 10000U);
}

TEST(FarFrr, SingleGenuineBelowThreshold) {
  const std::vector<double> gen = {0.6};
  const std::vector<double> imp = {0.1};
  const auto c = far_frr(histogram_of(ScoreKind::Genuine, gen),
                         histogram_of(ScoreKind::Imposter, imp));
  EXPECT_DOUBLE_EQ(c.frr[7000], 1.0);
}

TEST(FarFrr, EmptyInputs) {
  ScoreHistogram g(ScoreKind::Genuine), i(ScoreKind::Imposter);
  i.record(0.2);
  try {
    far_frr(g, i);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Input);
    EXPECT_NE(std::string(e.what()).find("genuine"), std::string::npos);
  }
}

TEST(FarFrr, RandomizedPropertiesAndBruteForce) {
  RngStream rng(1, StreamDomain::Test, 11);
  for (int round = 0; round < 100; ++round) {
    const std::uint32_t bins = round % 3 == 0 ? 10000 : 50 + static_cast<std::uint32_t>(rng.below(500));
    const std::size_t ng = 1 + rng.below(3000);
    const std::size_t ni = 1 + rng.below(6000);
    const auto gen = round % 2 ? testing::lattice_scores(rng, ng, bins)
                               : testing::uniform_scores(rng, ng, 0.3, 1.0);
    const auto imp = round % 2 ? testing::lattice_scores(rng, ni, bins)
                               : testing::uniform_scores(rng, ni, 0.0, 0.7);
    const auto c = far_frr(histogram_of(ScoreKind::Genuine, gen, bins),
                           histogram_of(ScoreKind::Imposter, imp, bins));
    ASSERT_DOUBLE_EQ(c.far[0], 1.0);
    ASSERT_DOUBLE_EQ(c.frr[0], 0.0);
    for (std::uint32_t i = 0; i < bins; ++i) {
      if (i > 0) {
        ASSERT_LE(c.far[i], c.far[i - 1]);
        ASSERT_GE(c.frr[i], c.frr[i - 1]);
      }
      const double t = static_cast<double>(i) / bins;
      const auto above = count_at_or_above(imp, t);
      const auto below = count_below(gen, t);
      ASSERT_EQ(c.imposter_at_or_above[i], above) << round << " " << i;
      ASSERT_EQ(c.genuine_below[i], below) << round << " " << i;
      ASSERT_EQ(c.far[i], static_cast<double>(above) / static_cast<double>(ni));
      ASSERT_EQ(c.frr[i], static_cast<double>(below) / static_cast<double>(ng));
      ASSERT_EQ(c.imposter_at_or_above[i] + count_below(imp, t), ni);
    }
  }
}

TEST(FarFrr, MergedEqualsUnionOfRawScores) {
  RngStream rng(1, StreamDomain::Test, 12);
  const auto g1 = testing::uniform_scores(rng, 2000, 0.4, 1.0);
  const auto g2 = testing::uniform_scores(rng, 3000, 0.5, 1.0);
  const auto i1 = testing::uniform_scores(rng, 2500, 0.0, 0.6);
  const auto i2 = testing::uniform_scores(rng, 2500, 0.0, 0.5);
  const auto merged = far_frr(merge(histogram_of(ScoreKind::Genuine, g1),
                                    histogram_of(ScoreKind::Genuine, g2)),
                              merge(histogram_of(ScoreKind::Imposter, i1),
                                    histogram_of(ScoreKind::Imposter, i2)));
  std::vector<double> gen = g1, imp = i1;
  gen.insert(gen.end(), g2.begin(), g2.end());
  imp.insert(imp.end(), i2.begin(), i2.end());
  for (std::uint32_t i = 0; i < 10000; i += 7) {
    const double t = i / 10000.0;
    ASSERT_EQ(merged.imposter_at_or_above[i], count_at_or_above(imp, t));
    ASSERT_EQ(merged.genuine_below[i], count_below(gen, t));
  }
}

TEST(Extrapolate, DecadeFixtureTablePattern) {
  const auto curve = extrapolate_tails(
      far_frr(testing::decade_frr_genuines(), testing::decade_far_imposters()), 5);
  ASSERT_TRUE(curve.pofa_fit);
  EXPECT_EQ(*curve.last_positive_far, 5000U);
  EXPECT_NEAR(curve.pofa_fit->slope, -40.0, 1e-3);
  EXPECT_LT(curve.pofa_fit->max_residual, 1e-3);
  EXPECT_FALSE(curve.pofa(5000));
  EXPECT_LE(*curve.pofa(5250), 1e-9);
  EXPECT_LE(*curve.pofa(5500), 1e-10);
  EXPECT_DOUBLE_EQ(inverse_threshold(curve, TailSide::Pofa, 1e-10), 0.55);
  // Junction continuity: the fit meets the last empirical point.
  EXPECT_NEAR(curve.pofa_fit->log10_at(0.5), std::log10(curve.far[5000]),
              curve.pofa_fit->max_residual + 1e-9);
}

TEST(Extrapolate, MirroredFrrFixture) {
  const auto curve = extrapolate_tails(
      far_frr(testing::decade_frr_genuines(), testing::decade_far_imposters()), 5);
  ASSERT_TRUE(curve.pofr_fit);
  EXPECT_NEAR(curve.pofr_fit->slope, 40.0, 1e-3);
  EXPECT_EQ(*curve.first_positive_frr, 4225U);
  EXPECT_FALSE(curve.pofr(4225));
  EXPECT_TRUE(curve.pofr(4224));
  EXPECT_NEAR(inverse_threshold(curve, TailSide::Pofr, 1e-10), 0.3725, 1e-4);
}

TEST(Extrapolate, TwoPointFixture) {
  ScoreHistogram g(ScoreKind::Genuine);
  g.record(0.9);
  g.record(0.95);
  const auto curve = extrapolate_tails(far_frr(g, testing::two_point_imposters()), 2);
  ASSERT_TRUE(curve.pofa_fit);
  EXPECT_EQ(curve.pofa_fit->points, 2U);
  EXPECT_NEAR(*curve.pofa(6000), 1e-6, 1e-12);
  EXPECT_NEAR(curve.pofa_fit->slope, -20.0, 1e-9);
}

TEST(Extrapolate, FlatWindowGivesZeroSlope) {
  const std::vector<double> t = {0.1, 0.2, 0.3};
  const std::vector<double> r = {1e-3, 1e-3, 1e-3};
  const auto fit = fit_log_linear(t, r);
  EXPECT_DOUBLE_EQ(fit.slope, 0.0);
  EXPECT_NEAR(fit.rate_at(0.9), 1e-3, 1e-15);
}

TEST(Extrapolate, TooFewPointsIsCarriedInCurve) {
  ScoreHistogram g(ScoreKind::Genuine), i(ScoreKind::Imposter);
  g.record(0.8);
  i.record(0.1);
  const auto curve = extrapolate_tails(far_frr(g, i), 5);
  EXPECT_FALSE(curve.pofa_fit);
  EXPECT_FALSE(curve.pofa_unavailable.empty());
  EXPECT_FALSE(curve.pofa(5000));
  EXPECT_EQ(kind_of([&] { inverse_threshold(curve, TailSide::Pofa, 1e-10); }),
            ErrorKind::ExtrapolationUnavailable);
  EXPECT_EQ(kind_of([&] { fit_log_linear(std::vector<double>{0.1}, std::vector<double>{0.1}); }),
            ErrorKind::ExtrapolationUnavailable);
}

TEST(Inverse, TargetOneIsThresholdZero) {
  const auto curve = extrapolate_tails(
      far_frr(testing::decade_frr_genuines(), testing::decade_far_imposters()), 5);
  EXPECT_DOUBLE_EQ(inverse_threshold(curve, TailSide::Pofa, 1.0), 0.0);
  EXPECT_EQ(kind_of([&] { inverse_threshold(curve, TailSide::Pofa, 0.0); }),
            ErrorKind::Parameter);
  EXPECT_EQ(kind_of([&] { inverse_threshold(curve, TailSide::Pofa, 1e-300); }),
            ErrorKind::OutOfRange);
}

TEST(SafetyInterval, AnchoredFixture) {
  const auto curve = extrapolate_tails(
      far_frr(testing::decade_frr_genuines(), testing::decade_far_imposters()), 5);
  const auto si = derive_safety_interval(curve, 1e-10);
  EXPECT_NEAR(si.a, 0.3725, 1e-4);
  EXPECT_DOUBLE_EQ(si.b, 0.55);
  EXPECT_NEAR(si.width(), 0.1775, 1e-4);
  EXPECT_EQ(si.derivation, IntervalDerivation::Statistical);
}

TEST(SafetyInterval, LargerEpsilonNarrowsInterval) {
  const auto curve = extrapolate_tails(
      far_frr(testing::decade_frr_genuines(), testing::decade_far_imposters()), 5);
  const auto tight = derive_safety_interval(curve, 1e-10);
  const auto loose = derive_safety_interval(curve, 1e-9);
  EXPECT_LT(loose.width(), tight.width());
  EXPECT_NEAR(loose.width(), tight.width() - 0.05, 2e-4);
}

ErrorCurve uniform_curve(double gen_lo, double imp_hi) {
  RngStream rng(1, StreamDomain::Test, 13);
  const auto gen = testing::uniform_scores(rng, 5000, gen_lo, 1.0);
  const auto imp = testing::uniform_scores(rng, 5000, 0.0, imp_hi);
  return extrapolate_tails(far_frr(histogram_of(ScoreKind::Genuine, gen),
                                   histogram_of(ScoreKind::Imposter, imp)),
                           5);
}

TEST(SafetyInterval, OverlappingPopulationsGiveWideInterval) {
  const auto si = derive_safety_interval(uniform_curve(0.0, 1.0), 0.01);
  EXPECT_NEAR(si.a, 0.01, 0.005);
  EXPECT_NEAR(si.b, 0.99, 0.005);
}

TEST(SafetyInterval, SeparatedPopulationsAreDegenerate) {
  // FRR stays below epsilon up to about 0.6 while FAR drops below it near
  // 0.4, so a > b.
  EXPECT_EQ(kind_of([&] { derive_safety_interval(uniform_curve(0.6, 0.4), 0.01); }),
            ErrorKind::DegenerateLandscape);
}

ErrorCurve crossing_curve(double at) {
  ScoreHistogram g(ScoreKind::Genuine, 100), i(ScoreKind::Imposter, 100);
  g.record(at + 0.005);
  i.record(at - 0.005);
  return far_frr(g, i);
}

TEST(Eer, SingleAndMultipleCurves) {
  const auto one = eer_crossing(crossing_curve(0.48));
  ASSERT_TRUE(one);
  const std::vector<ErrorCurve> single = {crossing_curve(0.48)};
  const auto e1 = fuzzy_eer(single);
  EXPECT_DOUBLE_EQ(e1.lo, e1.hi);
  EXPECT_DOUBLE_EQ(e1.lo, *one);
  const std::vector<ErrorCurve> two = {crossing_curve(0.47), crossing_curve(0.49)};
  const auto e2 = fuzzy_eer(two);
  EXPECT_NEAR(e2.lo, 0.47, 0.01);
  EXPECT_NEAR(e2.hi, 0.49, 0.01);
  EXPECT_NEAR(e2.hi - e2.lo, 0.02, 1e-9);
}

TEST(Eer, LinearInterpolation) {
  // FAR - FRR goes from +0.5 at 0.4 to -0.5 at 0.5 on a 10-bin grid.
  ScoreHistogram g(ScoreKind::Genuine, 10), i(ScoreKind::Imposter, 10);
  g.add_to_bin(4, 1);
  g.add_to_bin(9, 1);
  i.add_to_bin(3, 1);
  i.add_to_bin(4, 1);
  const auto c = far_frr(g, i);
  ASSERT_DOUBLE_EQ(c.far[4] - c.frr[4], 0.5);
  ASSERT_DOUBLE_EQ(c.far[5] - c.frr[5], -0.5);
  EXPECT_NEAR(*eer_crossing(c), 0.45, 1e-12);
}

TEST(Eer, NoCrossingIsExcluded) {
  // Both populations in the top bin: FAR stays 1 and FRR stays 0.
  ScoreHistogram g(ScoreKind::Genuine, 100), i(ScoreKind::Imposter, 100);
  g.record(1.0);
  i.record(1.0);
  const std::vector<ErrorCurve> curves = {crossing_curve(0.48), far_frr(g, i)};
  const auto e = fuzzy_eer(curves);
  EXPECT_EQ(e.excluded, (std::vector<std::size_t>{1}));
  EXPECT_EQ(e.crossings.size(), 1U);
  const std::vector<ErrorCurve> none = {far_frr(g, i)};
  EXPECT_EQ(kind_of([&] { fuzzy_eer(none); }), ErrorKind::Input);
}

TEST(Landscape, DirectCountExample) {
  const std::vector<double> gen = {0.6, 0.7, 0.5};
  const std::vector<double> imp = {0.1, 0.2};
  const auto s = landscape_stats(histogram_of(ScoreKind::Genuine, gen),
                                 histogram_of(ScoreKind::Imposter, imp),
                                 SafetyInterval{0.3725, 0.55});
  EXPECT_EQ(s.genuine_in_O, 1U);
  EXPECT_EQ(s.imposter_in_O, 0U);
  EXPECT_EQ(s.absolute_safety_count, 3U);
  EXPECT_DOUBLE_EQ(s.absolute_safety_fraction, 1.0);
  EXPECT_DOUBLE_EQ(s.honest_positive_undecidable_percent, 100.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.undecidable_percent,
                   s.honest_positive_undecidable_percent + s.honest_negative_undecidable_percent);
  EXPECT_DOUBLE_EQ(s.width, 0.55 - 0.3725);
}

TEST(Landscape, ImposterAtOneLeavesNoSafety) {
  const std::vector<double> gen = {0.6, 0.99};
  const std::vector<double> imp = {1.0};
  const auto s = landscape_stats(histogram_of(ScoreKind::Genuine, gen),
                                 histogram_of(ScoreKind::Imposter, imp),
                                 SafetyInterval{0.3725, 0.55});
  EXPECT_EQ(s.absolute_safety_count, 0U);
}

TEST(Landscape, ReportedPercentagesAreAdditive) {
  EXPECT_NEAR(2.7e-4 + 1.42e-4, 4.12e-4, 1e-15);
  RngStream rng(1, StreamDomain::Test, 14);
  for (int round = 0; round < 50; ++round) {
    const auto gen = testing::uniform_scores(rng, 1 + rng.below(500), 0.3, 1.0);
    const auto imp = testing::uniform_scores(rng, 1 + rng.below(500), 0.0, 0.7);
    double a = 0.05 + 0.4 * rng.uniform();
    const SafetyInterval si{a, a + 0.05 + 0.4 * rng.uniform()};
    const auto s = landscape_stats(histogram_of(ScoreKind::Genuine, gen),
                                   histogram_of(ScoreKind::Imposter, imp), si);
    ASSERT_EQ(s.undecidable_percent,
              s.honest_positive_undecidable_percent + s.honest_negative_undecidable_percent);
    // Lower-edge classification oracle.
    std::uint64_t g_in = 0;
    for (double x : gen) {
      const double edge = ScoreHistogram::bin_of(x, 10000) / 10000.0;
      g_in += edge > si.a && edge < si.b;
    }
    ASSERT_EQ(s.genuine_in_O, g_in);
    double top = 0;
    for (double x : imp) top = std::max(top, x);
    std::uint64_t safe = 0;
    for (double x : gen) safe += ScoreHistogram::bin_of(x, 10000) > ScoreHistogram::bin_of(top, 10000);
    ASSERT_EQ(s.absolute_safety_count, safe);
  }
}

TEST(CurveCsv, FormatAndUndefinedFields) {
  ScoreHistogram g(ScoreKind::Genuine, 4), i(ScoreKind::Imposter, 4);
  g.record(0.9);
  i.record(0.1);
  i.record(0.3);
  // Knots (0, 1) and (0.25, 0.5) halve the odds every 0.25.
  const auto csv = curve_csv(extrapolate_tails(far_frr(g, i), 5));
  const std::string expected =
      "threshold,far,frr,pofa,pofr\n"
      "0.000000,1.00000e+00,0.00000e+00,,\n"
      "0.250000,5.00000e-01,0.00000e+00,,\n"
      "0.500000,0.00000e+00,0.00000e+00,2.50000e-01,\n"
      "0.750000,0.00000e+00,0.00000e+00,1.25000e-01,\n";
  EXPECT_EQ(csv, expected);
}

}  // namespace
}  // namespace iivds
