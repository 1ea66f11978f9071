#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pitchbench/errors.hpp"
#include "pitchbench/indices.hpp"

using namespace pitchbench;

namespace {

constexpr double kDf = 44100.0 / 65536.0;

// Synthetic analysis on the long grid with every bin valid.
TransferAnalysis make_analysis(std::size_t bins, double p_lti, double p_td) {
  TransferAnalysis ta;
  ta.freq_long.resize(bins);
  for (std::size_t k = 0; k < bins; ++k)
    ta.freq_long[k] = static_cast<double>(k) * kDf;
  ta.p_lti.assign(bins, p_lti);
  ta.p_td.assign(bins, p_td);
  ta.sigma2_tv.assign(bins, p_td / 2);
  ta.sigma2_nlti_long.assign(bins, p_td / 2);
  ta.valid_long.assign(bins, 1);
  ta.valid_td.assign(bins, 1);
  return ta;
}

}  // namespace

TEST_CASE("bandwidth: flat band crossing near 50 Hz") {
  auto ta = make_analysis(200, 1.0, 1e-12);
  // force the first LTI/TD crossing at the first bin past 50 Hz
  std::size_t k_cross = 0;
  while (ta.freq_long[k_cross] <= 50.0) ++k_cross;
  for (std::size_t k = k_cross; k < ta.p_td.size(); ++k) ta.p_td[k] = 10.0;

  auto r = bandwidth(ta);
  CHECK(r.crossed);
  CHECK(r.f_hl_hz == ta.freq_long[k_cross]);

  // independent enumeration oracle over 0 < k <= k_cross
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k <= k_cross; ++k) {
    num += ta.freq_long[k] * ta.freq_long[k];
    den += 1.0;
  }
  const double oracle = std::sqrt(num / den);
  CHECK(r.bw_hz == doctest::Approx(oracle).epsilon(1e-12));
  // analytic shorthand: RMS of uniform power over [0, B] is B/sqrt(3)
  CHECK(r.bw_hz == doctest::Approx(r.f_hl_hz / std::sqrt(3.0)).epsilon(0.03));
}

TEST_CASE("bandwidth: crossing at the first bin") {
  auto ta = make_analysis(64, 1.0, 1e-12);
  ta.p_td[1] = 2.0;  // P_LTI < P_TD already at bin 1
  auto r = bandwidth(ta);
  CHECK(r.crossed);
  CHECK(r.bw_hz == doctest::Approx(ta.freq_long[1]).epsilon(1e-12));
  CHECK(r.f_hl_hz == ta.freq_long[1]);
}

TEST_CASE("bandwidth: no crossing is flagged at the band edge") {
  auto ta = make_analysis(200, 1.0, 1e-12);
  auto r = bandwidth(ta, 100.0);
  CHECK_FALSE(r.crossed);
  CHECK(r.f_hl_hz > 99.0);
  CHECK(r.f_hl_hz <= 100.0);
  CHECK(r.bw_hz <= r.f_hl_hz);
}

TEST_CASE("bandwidth monotonicity: raising the disturbance never widens") {
  auto ta = make_analysis(200, 1.0, 1e-12);
  for (std::size_t k = 0; k < ta.p_td.size(); ++k)
    ta.p_td[k] = 1e-3 * std::pow(1.1, static_cast<double>(k));
  auto base = bandwidth(ta);
  for (double factor : {2.0, 10.0, 100.0}) {
    auto raised_ta = ta;
    for (auto& v : raised_ta.p_td) v *= factor;
    auto raised = bandwidth(raised_ta);
    CHECK(raised.bw_hz <= base.bw_hz + 1e-12);
  }
}

TEST_CASE("snr: fixed ratios") {
  auto ta = make_analysis(64, 1.0, 0.01);
  CHECK(snr_fm(ta, 10.0) == doctest::Approx(20.0).epsilon(1e-12));

  auto even = make_analysis(64, 0.5, 0.5);
  CHECK(snr_fm(even, 10.0) == doctest::Approx(0.0).epsilon(1e-12));

  // two valid bins with LTI/TD ratios 10 and 1000 at equal disturbance
  auto two = make_analysis(8, 1.0, 1.0);
  two.valid_td.assign(8, 0);
  two.valid_td[1] = two.valid_td[2] = 1;
  two.p_lti[1] = 10.0;
  two.p_lti[2] = 1000.0;
  const double expected = 10.0 * std::log10((10.0 + 1000.0) / 2.0);
  CHECK(snr_fm(two, 10.0) == doctest::Approx(expected).epsilon(1e-12));

  SUBCASE("scaling both powers leaves the snr unchanged") {
    auto doubled = make_analysis(64, 2.0, 0.02);
    CHECK(snr_fm(doubled, 10.0) ==
          doctest::Approx(snr_fm(ta, 10.0)).epsilon(1e-12));
  }

  SUBCASE("empty band is an error") {
    CHECK_THROWS_AS(snr_fm(ta, 0.1), IndexUndefinedError);
  }
}

TEST_CASE("sd_fd: gain-change rate over the 10 Hz band") {
  auto flat = make_analysis(64, 1.0, 1e-12);
  CHECK(sd_fd(flat) == doctest::Approx(0.0).epsilon(1e-12));

  // alternating +-0.5 dB steps
  auto alt = make_analysis(64, 1.0, 1e-12);
  for (std::size_t k = 0; k < alt.p_lti.size(); ++k)
    alt.p_lti[k] = (k % 2 == 0) ? 1.0 : std::pow(10.0, 0.05);
  CHECK(sd_fd(alt) == doctest::Approx(0.5 / std::sqrt(kDf)).epsilon(1e-12));

  // a single valid pair with a 3 dB step
  auto single = make_analysis(8, 1.0, 1e-12);
  single.valid_long.assign(8, 0);
  single.valid_long[1] = single.valid_long[2] = 1;
  single.p_lti[2] = std::pow(10.0, 0.3);
  CHECK(sd_fd(single) ==
        doctest::Approx(3.0 / std::sqrt(kDf)).epsilon(1e-12));

  SUBCASE("no usable pairs is an error") {
    auto none = make_analysis(8, 1.0, 1e-12);
    none.valid_long.assign(8, 0);
    CHECK_THROWS_AS(sd_fd(none), IndexUndefinedError);
  }
}

TEST_CASE("mean gain over the index band") {
  auto ta = make_analysis(64, 4.0, 1e-12);
  CHECK(mean_gain_db(ta) ==
        doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
}

TEST_CASE("sd_td: gain-change rate across the carrier grid") {
  // semitone positions of the default 112-target grid
  std::vector<double> semis;
  for (int g = 0; g < 112; ++g)
    semis.push_back(12.0 * std::log2(80.0) + 0.25 * g);

  std::vector<std::pair<double, double>> flat;
  for (double s : semis) flat.emplace_back(s, -3.0);
  CHECK(sd_td(flat, 80.0, 400.0) == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> alt;
  for (std::size_t i = 0; i < semis.size(); ++i)
    alt.emplace_back(semis[i], (i % 2 == 0) ? 0.0 : 0.25);
  CHECK(sd_td(alt, 80.0, 400.0) ==
        doctest::Approx(0.25 / std::sqrt(0.25)).epsilon(1e-12));

  // 500..1000 Hz covers semitones (re 1 Hz) 107.6 .. 119.6
  std::vector<std::pair<double, double>> pair_case{{108.0, 0.0},
                                                   {108.25, 1.0}};
  CHECK(sd_td(pair_case, 500.0, 1000.0) ==
        doctest::Approx(1.0 / std::sqrt(0.25)).epsilon(1e-12));

  SUBCASE("nonuniform grids are rejected") {
    std::vector<std::pair<double, double>> bad{{108.0, 0.0},
                                               {108.25, 0.0},
                                               {108.6, 0.0}};
    CHECK_THROWS_AS(sd_td(bad, 500.0, 1000.0), ParameterError);
  }
  SUBCASE("fewer than two targets in range is an error") {
    std::vector<std::pair<double, double>> lonely{{108.0, 0.0}};
    CHECK_THROWS_AS(sd_td(lonely, 500.0, 1000.0), IndexUndefinedError);
  }
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), ParameterError);
}

TEST_CASE("performance map aggregates with the median") {
  ExtractorSweepIndices one;
  one.extractor_id = "solo";
  one.bw_hz = {12.5};
  one.snr_fm_db = {40.0};
  one.sd_fd = {0.1};
  one.sd_td = 0.02;

  ExtractorSweepIndices many;
  many.extractor_id = "many";
  many.bw_hz = {1.0, 2.0, 3.0, 100.0};
  many.snr_fm_db = {10.0, 20.0, 30.0, 40.0};
  many.sd_fd = {0.1, 0.2, 0.3, 0.4};
  many.sd_td = 0.5;

  auto records = performance_map({one, many});
  REQUIRE(records.size() == 2);
  CHECK(records[0].extractor_id == "solo");
  CHECK(records[0].bw_hz_median == 12.5);
  CHECK(records[0].snr_fm_db_median == 40.0);
  CHECK(records[1].bw_hz_median == 2.5);
  CHECK(records[1].snr_fm_db_median == 25.0);
  CHECK(records[1].sd_fd_median == doctest::Approx(0.25));
  CHECK(records[1].sd_td == 0.5);
}
