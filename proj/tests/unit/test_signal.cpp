#include "doctest.h"

#include "../support/oracles.hpp"
#include "emobase/errors.hpp"
#include "emobase/rng.hpp"
#include "emobase/signal/recording_io.hpp"
#include "emobase/signal/signal.hpp"

#include <sstream>

using namespace emobase;
using namespace emobase::signal;

namespace {

TimeSeries series(Channel c, std::vector<std::pair<std::int64_t, double>> pts, std::string device = "dev") {
  TimeSeries ts;
  ts.channel = c;
  ts.device = std::move(device);
  for (auto [t, v] : pts) ts.samples.push_back({t, v});
  return ts;
}

TimeSeries from_values(Channel c, const std::vector<double>& v) {
  TimeSeries ts;
  ts.channel = c;
  for (std::size_t i = 0; i < v.size(); ++i) ts.samples.push_back({static_cast<std::int64_t>(i) * 1000, v[i]});
  return ts;
}

SessionSchedule schedule(std::vector<Segment> segs) {
  SessionSchedule s;
  s.session_id = "s";
  s.segments = std::move(segs);
  return s;
}

}  // namespace

TEST_CASE("time series validation rejects bad input") {
  CHECK_THROWS_AS(validate(series(Channel::HR, {})), IngestError);
  CHECK_THROWS_AS(validate(series(Channel::HR, {{0, 1.0}, {0, 2.0}})), IngestError);
  CHECK_THROWS_AS(validate(series(Channel::HR, {{0, 1.0}, {1000, NAN}})), IngestError);
  CHECK_NOTHROW(validate(series(Channel::HR, {{0, 1.0}, {1000, 2.0}})));
}

TEST_CASE("schedule validation") {
  CHECK_NOTHROW(validate(schedule({{0, 10, Emotion::Rest, {}}, {10, 20, Emotion::Fear, "c1"}})));
  CHECK_THROWS_AS(validate(schedule({{0, 10, Emotion::Fear, {}}})), ScheduleError);
  CHECK_THROWS_AS(validate(schedule({{0, 10, Emotion::Rest, {}}, {5, 20, Emotion::Rest, {}}})), ScheduleError);
  CHECK_THROWS_AS(validate(schedule({{10, 10, Emotion::Rest, {}}})), ScheduleError);
}

TEST_CASE("alignment interpolates inside and holds at the edges") {
  // 2 Hz stream starting late, 1 Hz stream starting at 0.
  const auto a = series(Channel::HR, {{0, 0.0}, {1000, 10.0}, {2000, 20.0}, {3000, 30.0}});
  const auto b = series(Channel::GSR, {{1250, 5.0}, {1750, 7.0}, {2250, 9.0}});
  const std::vector<TimeSeries> in{a, b};
  const auto out = align_and_resample(in, 1.0);
  REQUIRE(out.size() == 2);
  REQUIRE(out[0].samples.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(out[0].samples[k].t_ms == static_cast<std::int64_t>(k) * 1000);
    CHECK(out[1].samples[k].t_ms == static_cast<std::int64_t>(k) * 1000);
  }
  CHECK(out[0].samples[2].value == doctest::Approx(20.0));
  // Before the first and after the last GSR sample the nearest value holds.
  CHECK(out[1].samples[0].value == 5.0);
  CHECK(out[1].samples[1].value == 5.0);
  CHECK(out[1].samples[3].value == 9.0);
  // 2000 ms sits halfway between 1750 (7) and 2250 (9).
  CHECK(out[1].samples[2].value == doctest::Approx(8.0));
}

TEST_CASE("alignment grid covers the union of ranges, rounding outward") {
  const auto a = series(Channel::HR, {{1500, 1.0}, {2500, 2.0}});
  const auto b = series(Channel::BR, {{400, 3.0}, {900, 4.0}});
  const std::vector<TimeSeries> in{a, b};
  const auto out = align_and_resample(in, 1.0);
  REQUIRE(out[0].samples.size() == 4);  // 0, 1, 2, 3 s
  CHECK(out[0].samples.front().t_ms == 0);
  CHECK(out[0].samples.back().t_ms == 3000);
  CHECK(out[0].samples[2].value == doctest::Approx(1.5));
}

TEST_CASE("alignment at other rates and bad rates") {
  const auto a = series(Channel::HR, {{0, 0.0}, {1000, 1.0}});
  const std::vector<TimeSeries> in{a};
  const auto out = align_and_resample(in, 4.0);
  REQUIRE(out[0].samples.size() == 5);
  CHECK(out[0].samples[1].t_ms == 250);
  CHECK(out[0].samples[1].value == doctest::Approx(0.25));
  CHECK_THROWS_AS(align_and_resample(in, 0.0), ConfigError);
  CHECK(align_and_resample(std::span<const TimeSeries>{}, 1.0).empty());
}

TEST_CASE("median filter examples") {
  SUBCASE("spike removed") {
    const auto out = median_filter(from_values(Channel::GSR, {0, 0, 0, 0, 0, 100, 0, 0, 0, 0, 0, 0}), 10);
    for (const auto& s : out.samples) CHECK(s.value == 0.0);
  }
  SUBCASE("constant unchanged") {
    const auto out = median_filter(from_values(Channel::GSR, std::vector<double>(20, 3.5)), 7);
    for (const auto& s : out.samples) CHECK(s.value == 3.5);
  }
  SUBCASE("even window averages the middle pair") {
    const auto out = median_filter(from_values(Channel::GSR, {1, 3}), 2);
    CHECK(out.samples[0].value == 1.0);
    CHECK(out.samples[1].value == 2.0);
  }
  SUBCASE("order 1 is the identity") {
    const std::vector<double> v{4, -1, 7, 2};
    const auto out = median_filter(from_values(Channel::GSR, v), 1);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(out.samples[i].value == v[i]);
  }
  CHECK_THROWS_AS(median_filter(from_values(Channel::GSR, {1.0}), 0), ConfigError);
}

TEST_CASE("median filter equals the brute-force sliding median") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(60);
    const std::size_t order = 1 + rng.index(15);
    std::vector<double> v(n);
    // Coarse values so that ties are common.
    for (auto& x : v) x = static_cast<double>(rng.index(7)) - 3.0 + (rng.uniform() < 0.3 ? rng.normal() : 0.0);
    const auto got = median_filter(from_values(Channel::GSR, v), order);
    const auto want = oracle::sliding_median(v, order);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(got.samples[i].value == want[i]);
  }
}

TEST_CASE("session normalization") {
  const auto out = normalize_session(from_values(Channel::HR, {1, 2, 3, 4, 5}));
  CHECK_FALSE(out.degenerate);
  std::vector<double> v = out.series.values();
  CHECK(oracle::mean(v) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(oracle::sample_std(v) == doctest::Approx(1.0));
  // sample std of 1..5 is sqrt(2.5)
  CHECK(v[0] == doctest::Approx(-2.0 / std::sqrt(2.5)));

  const auto flat = normalize_session(from_values(Channel::HR, {7, 7, 7}));
  CHECK(flat.degenerate);
  for (double x : flat.series.values()) CHECK(x == 0.0);
}

TEST_CASE("normalization is invariant to affine rescaling of the input") {
  Rng rng(3);
  std::vector<double> v(50), w(50);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = rng.normal();
    w[i] = 3.0 * v[i] - 8.0;
  }
  const auto a = normalize_session(from_values(Channel::HR, v)).series.values();
  const auto b = normalize_session(from_values(Channel::HR, w)).series.values();
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("labelling trims emotion segments and excludes gaps") {
  std::vector<double> v(40, 1.0);
  const std::vector<TimeSeries> grid{from_values(Channel::HR, v)};
  const auto s = schedule({{0, 10, Emotion::Rest, {}}, {10, 30, Emotion::Fear, "c1"}, {32, 40, Emotion::Rest, {}}});
  const auto set = label_stream(grid, s, 5.0);
  REQUIRE(set.size() == 40);
  CHECK(set.labels[0] == Emotion::Rest);
  CHECK(set.excluded[0] == 0);  // rest is never trimmed
  CHECK(set.labels[10] == Emotion::Fear);
  CHECK(set.excluded[10] == 1);
  CHECK(set.excluded[14] == 1);
  CHECK(set.excluded[15] == 0);
  CHECK(set.excluded[29] == 0);
  CHECK(set.excluded[30] == 1);  // gap between segments
  CHECK(set.segment_index[30] == -1);
  CHECK(set.clip_at(30) == nullptr);
  CHECK(set.excluded[32] == 0);
  REQUIRE(set.clip_at(20) != nullptr);
  CHECK(**set.clip_at(20) == "c1");
}

TEST_CASE("labelling errors") {
  std::vector<double> v(10, 1.0);
  const std::vector<TimeSeries> grid{from_values(Channel::HR, v)};
  CHECK_THROWS_AS(label_stream(grid, schedule({{0, 20, Emotion::Rest, {}}})), ScheduleError);
  const std::vector<TimeSeries> dup{from_values(Channel::HR, v), from_values(Channel::HR, v)};
  CHECK_THROWS_AS(label_stream(dup, schedule({{0, 5, Emotion::Rest, {}}})), IngestError);
  CHECK_THROWS_AS(label_stream(grid, schedule({{0, 5, Emotion::Rest, {}}}), -1.0), ConfigError);
}

TEST_CASE("preprocessing runs the whole chain") {
  std::vector<double> hr, gsr;
  for (int i = 0; i < 60; ++i) {
    hr.push_back(70 + (i % 5));
    gsr.push_back(i == 30 ? 100.0 : 5.0 + 0.01 * i);
  }
  std::vector<TimeSeries> raw{from_values(Channel::HR, hr), from_values(Channel::GSR, gsr),
                              from_values(Channel::SKT, std::vector<double>(60, 33.0))};
  const auto s = schedule({{0, 20, Emotion::Rest, {}}, {20, 60, Emotion::Fear, "c"}});
  const auto out = preprocess_session(raw, s);
  REQUIRE(out.degenerate_channels.size() == 1);
  CHECK(out.degenerate_channels[0] == Channel::SKT);
  const auto& g = out.signals.channel(Channel::GSR);
  // The spike is filtered away before normalization, so no sample stands out.
  double max_abs = 0.0;
  for (double x : g) max_abs = std::max(max_abs, std::abs(x));
  CHECK(max_abs < 2.5);
  CHECK(out.signals.excluded[20] == 1);
  CHECK(out.signals.excluded[35] == 0);
}

TEST_CASE("recording CSV round trip") {
  std::vector<TimeSeries> streams{series(Channel::HR, {{0, 70.5}, {1000, 71.25}}, "chest"),
                                  series(Channel::BR, {{0, 0.1}, {1000, 1e-17}}, "chest")};
  std::stringstream buf;
  write_recording_csv(buf, streams);
  const auto back = read_recording_csv(buf, "chest");
  REQUIRE(back.size() == 2);
  CHECK(back[0].channel == Channel::HR);
  CHECK(back[1].channel == Channel::BR);
  CHECK(back[0].samples[1].value == 71.25);
  CHECK(back[1].samples[1].value == 1e-17);
  CHECK(back[0].device == "chest");
}

TEST_CASE("recording CSV errors") {
  std::istringstream bad_header("time,channel,value\n0,HR,1\n");
  CHECK_THROWS_AS(read_recording_csv(bad_header, "d"), FormatError);
  std::istringstream bad_channel("timestamp_ms,channel,value\n0,EEG,1\n");
  CHECK_THROWS_AS(read_recording_csv(bad_channel, "d"), FormatError);
  std::istringstream bad_order("timestamp_ms,channel,value\n1000,HR,1\n0,HR,1\n");
  CHECK_THROWS_AS(read_recording_csv(bad_order, "d"), IngestError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_recording_csv(empty, "d"), IngestError);
}

TEST_CASE("manifest JSON round trip") {
  auto s = schedule({{0, 300, Emotion::Rest, {}}, {300, 500.5, Emotion::JoyAmus, "clip-9"}});
  s.epoch_ms = 1700000000000;
  const auto back = manifest_from_json(manifest_to_json(s));
  CHECK(back.session_id == "s");
  CHECK(back.epoch_ms == s.epoch_ms);
  REQUIRE(back.segments.size() == 2);
  CHECK(back.segments[1].end_s == 500.5);
  CHECK(back.segments[1].label == Emotion::JoyAmus);
  CHECK(*back.segments[1].clip_id == "clip-9");
  CHECK_FALSE(back.segments[0].clip_id.has_value());
}

TEST_CASE("labelled signals JSON round trip") {
  std::vector<double> v{0.5, -1.25, 2.0, 3.0};
  const std::vector<TimeSeries> grid{from_values(Channel::HR, v), from_values(Channel::GSR, v)};
  const auto set = label_stream(grid, schedule({{0, 2, Emotion::Rest, {}}, {2, 4, Emotion::Fear, "c"}}), 0.0);
  const auto back = labeled_from_json(labeled_to_json(set));
  CHECK(back.t_ms == set.t_ms);
  CHECK(back.labels == set.labels);
  CHECK(back.excluded == set.excluded);
  CHECK(back.channel(Channel::GSR) == set.channel(Channel::GSR));
  CHECK_FALSE(back.has(Channel::SKT));
}
