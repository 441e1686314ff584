#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <regex>

#include "oracles.hpp"
#include "sonowork/plot.hpp"
#include "sonowork/synth.hpp"
#include "sonowork/wav.hpp"

#ifndef SONOWORK_FIXTURE_DIR
#error "SONOWORK_FIXTURE_DIR must be defined"
#endif

using namespace sonowork;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::EmptyInput;
}

SonifyConfig log_config() {
  SonifyConfig c;
  c.mapping = Mapping::Logarithmic;
  return c;
}

Series series_of(std::vector<double> y) {
  Series s;
  s.y = std::move(y);
  for (std::size_t i = 0; i < s.y.size(); ++i) s.x.push_back(static_cast<double>(i));
  return s;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const SonifyConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.f_min, 220.0);
  EXPECT_EQ(c.f_max, 880.0);
  EXPECT_EQ(c.sample_rate, 44100u);
}

TEST(Config, InvalidSettingsRejected) {
  auto with = [](auto mutate) {
    SonifyConfig c;
    mutate(c);
    return kind_of([&] { validate(c); });
  };
  EXPECT_EQ(with([](SonifyConfig& c) { c.f_min = 10; }), ErrorKind::BadConfig);
  EXPECT_EQ(with([](SonifyConfig& c) { c.f_max = c.f_min; }), ErrorKind::BadConfig);
  EXPECT_EQ(with([](SonifyConfig& c) { c.f_max = 0.46 * c.sample_rate; }), ErrorKind::BadConfig);
  EXPECT_EQ(with([](SonifyConfig& c) { c.note_duration = 0.009; }), ErrorKind::BadConfig);
  EXPECT_EQ(with([](SonifyConfig& c) { c.amplitude = 0; }), ErrorKind::BadConfig);
  EXPECT_EQ(with([](SonifyConfig& c) { c.amplitude = 1.5; }), ErrorKind::BadConfig);
}

TEST(Config, JsonRoundTripAndErrors) {
  SonifyConfig c;
  c.waveform = Waveform::Square;
  c.mapping = Mapping::Logarithmic;
  c.f_max = 1000;
  c.note_duration = 0.25;
  EXPECT_EQ(sonify_config_from_json(to_json_value(c)), c);
  EXPECT_EQ(sonify_config_from_json(nlohmann::json::object()), SonifyConfig{});
  EXPECT_EQ(kind_of([] { sonify_config_from_json({{"waveform", "saw"}}); }), ErrorKind::BadConfig);
  EXPECT_EQ(kind_of([] { sonify_config_from_json({{"f_min", "low"}}); }), ErrorKind::BadConfig);
  EXPECT_EQ(kind_of([] { sonify_config_from_json({{"sample_rate", -5}}); }), ErrorKind::BadConfig);
}

TEST(MapValueToFreq, Examples) {
  const SonifyConfig lin;
  EXPECT_EQ(map_value_to_freq(0.0, lin), 220.0);
  EXPECT_EQ(map_value_to_freq(0.0, log_config()), 220.0);
  EXPECT_EQ(map_value_to_freq(1.0, lin), 880.0);
  EXPECT_EQ(map_value_to_freq(1.0, log_config()), 880.0);
  EXPECT_DOUBLE_EQ(map_value_to_freq(0.5, lin), 550.0);
  EXPECT_DOUBLE_EQ(map_value_to_freq(0.5, log_config()), 440.0);
  EXPECT_EQ(kind_of([&] { map_value_to_freq(1.01, lin); }), ErrorKind::OutOfRange);
  EXPECT_EQ(kind_of([&] { map_value_to_freq(std::nan(""), lin); }), ErrorKind::OutOfRange);
}

TEST(RenderNote, LengthAndEmpty) {
  const SonifyConfig c;
  EXPECT_EQ(render_note(440, c, 0.0).size(), 0u);
  EXPECT_EQ(render_note(440, c, 1.0).size(), 44100u);
  EXPECT_EQ(render_note(440, c, 0.1).size(), 4410u);
  EXPECT_EQ(kind_of([&] { render_note(30000, c, 1.0); }), ErrorKind::BadFrequency);
  EXPECT_EQ(kind_of([&] { render_note(-1, c, 1.0); }), ErrorKind::BadFrequency);
  EXPECT_EQ(kind_of([&] { render_note(440, c, -1.0); }), ErrorKind::BadDuration);
}

TEST(RenderNote, ZeroCrossingOracleSine440) {
  const SonifyConfig c;
  const auto note = render_note(440, c, 1.0);
  const double f = oracle::zero_crossing_freq(note.samples, c.sample_rate);
  EXPECT_NEAR(f, 440.0, 4.4);
}

TEST(RenderNote, SquareSamplesAreThreeLevel) {
  SonifyConfig c;
  c.waveform = Waveform::Square;
  const auto note = render_note(300, c, 0.2);
  const double ramp = c.envelope_ramp * c.sample_rate;
  const std::size_t n = note.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double env = std::min({1.0, i / ramp, (n - 1 - i) / ramp});
    const double a = c.amplitude * env;
    const double s = note.samples[i];
    ASSERT_TRUE(s == 0.0 || std::abs(std::abs(s) - a) < 1e-12) << i << " " << s;
  }
}

TEST(RenderNote, EnvelopeStartsAndEndsSilent) {
  const auto note = render_note(440, SonifyConfig{}, 0.1);
  EXPECT_EQ(note.samples.front(), 0.0);
  EXPECT_EQ(note.samples.back(), 0.0);
  const double peak = std::abs(*std::max_element(note.samples.begin(), note.samples.end(),
                                                 [](double a, double b) { return std::abs(a) < std::abs(b); }));
  EXPECT_NEAR(peak, 0.8, 1e-3);
}

TEST(EstimateFreq, Examples) {
  const SonifyConfig c;
  EXPECT_NEAR(estimate_freq(render_note(440, c, 1.0)), 440.0, 4.4);
  AudioBuffer zeros{44100, std::vector<double>(44100, 0.0)};
  EXPECT_EQ(estimate_freq(zeros), 0.0);
  SonifyConfig sq = c;
  sq.waveform = Waveform::Square;
  const auto square = render_note(300, sq, 1.0);
  EXPECT_NEAR(estimate_freq(square), 300.0, 3.0);
  EXPECT_NEAR(oracle::zero_crossing_freq(square.samples, 44100), 300.0, 3.0);
  EXPECT_EQ(kind_of([&] { estimate_freq(zeros, 5, 6); }), ErrorKind::TooShort);
  EXPECT_EQ(kind_of([&] { estimate_freq(zeros, 0, 44101); }), ErrorKind::TooShort);
}

TEST(SonifySeries, LengthFormula) {
  const SonifyConfig c;
  const auto s = series_of({0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  EXPECT_EQ(sonify_series(s, c).size(), 44100u);
}

TEST(SonifySeries, GapIsSilent) {
  const SonifyConfig c;
  const auto audio = sonify_series(series_of({0.2, std::nan(""), 0.8}), c);
  ASSERT_EQ(audio.size(), 3u * 4410u);
  for (std::size_t i = 4410; i < 2 * 4410; ++i) ASSERT_EQ(audio.samples[i], 0.0);
  EXPECT_GT(std::abs(audio.samples[100]), 0.0);
}

TEST(SonifySeries, IncreasingValuesGiveIncreasingPitch) {
  SonifyConfig c;
  c.note_duration = 0.25;
  const std::vector<double> y = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto audio = sonify_series(series_of(y), c);
  const std::size_t per = 11025;
  double prev = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const std::vector<double> seg(audio.samples.begin() + k * per, audio.samples.begin() + (k + 1) * per);
    const double f = oracle::zero_crossing_freq(seg, c.sample_rate);
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(SonifySeries, OrdersNotesByX) {
  const SonifyConfig c;
  Series forward = series_of({0.0, 1.0});
  Series backward{{1.0, 0.0}, {1.0, 0.0}, ""};
  EXPECT_EQ(sonify_series(forward, c).samples, sonify_series(backward, c).samples);
}

TEST(SonifySeries, Errors) {
  const SonifyConfig c;
  EXPECT_EQ(kind_of([&] { sonify_series(series_of({}), c); }), ErrorKind::EmptySeries);
  EXPECT_EQ(kind_of([&] { sonify_series(series_of({0.5, 2.0}), c); }), ErrorKind::NotNormalized);
  EXPECT_EQ(kind_of([&] { sonify_series(series_of({INFINITY}), c); }), ErrorKind::NotNormalized);
}

TEST(SonifyEvents, EmptyIsSilence) {
  const auto audio = sonify_events({}, 2.0, SonifyConfig{});
  ASSERT_EQ(audio.size(), 88200u);
  for (double s : audio.samples) ASSERT_EQ(s, 0.0);
}

TEST(SonifyEvents, SingleMaxWeightPingAtStartWithFMax) {
  const SonifyConfig c;
  const auto audio = sonify_events({{{3.0, 5.0}}}, 1.0, c);
  const std::size_t ping = 2205;
  EXPECT_NEAR(estimate_freq(audio, 0, ping), c.f_max, 0.02 * c.f_max);
  for (std::size_t i = ping; i < audio.size(); ++i) ASSERT_EQ(audio.samples[i], 0.0);
}

TEST(SonifyEvents, CoincidentPingsOverlapAddAndClip) {
  const SonifyConfig c;
  const auto audio = sonify_events({{{1.0, 1.0}, {1.0, 1.0}}}, 1.0, c);
  const auto one = oracle::ping(c.f_max, c.amplitude, c.sample_rate, 2205, c.envelope_ramp * c.sample_rate);
  double peak = 0.0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    const double expected = std::clamp(2.0 * one[i], -1.0, 1.0);
    ASSERT_NEAR(audio.samples[i], expected, 1e-12) << i;
    peak = std::max(peak, std::abs(audio.samples[i]));
  }
  EXPECT_EQ(peak, 1.0);
}

TEST(SonifyEvents, RescalesOntoTimeline) {
  const SonifyConfig c;
  const auto audio = sonify_events({{{10.0, 1.0}, {20.0, 1.0}}}, 2.0, c);
  EXPECT_EQ(audio.size(), 88200u);
  const std::size_t last_start = static_cast<std::size_t>(std::llround((2.0 - kPingDuration) * c.sample_rate));
  EXPECT_EQ(audio.samples[last_start - 1], 0.0);
  EXPECT_NE(audio.samples[last_start + 10], 0.0);
  EXPECT_EQ(kind_of([&] { sonify_events({}, 0.0, c); }), ErrorKind::BadTimeline);
}

TEST(SonifyEvents, WeightSetsPitch) {
  const SonifyConfig c;
  const auto audio = sonify_events({{{0.0, 0.0}, {1.0, 2.0}}}, 1.0, c);
  EXPECT_NEAR(estimate_freq(audio, 0, 2205), c.f_min, 0.03 * c.f_min);
}

TEST(Wav, HeaderArithmetic) {
  const auto empty = write_wav({44100, {}});
  ASSERT_EQ(empty.size(), 44u);
  EXPECT_EQ(empty[4] | (empty[5] << 8) | (empty[6] << 16) | (empty[7] << 24), 36);
  EXPECT_EQ(write_wav({44100, std::vector<double>(44100)}).size(), 44u + 88200u);
}

TEST(Wav, Quantization) {
  EXPECT_EQ(quantize_pcm16(1.0), 32767);
  EXPECT_EQ(quantize_pcm16(-1.0), -32767);
  EXPECT_EQ(quantize_pcm16(0.0), 0);
  EXPECT_EQ(quantize_pcm16(2.0), 32767);
  EXPECT_EQ(quantize_pcm16(-2.0), -32768);
}

TEST(Wav, GoldenEightSampleFile) {
  std::ifstream in(std::string(SONOWORK_FIXTURE_DIR) + "/golden_8.wav", std::ios::binary);
  ASSERT_TRUE(in);
  const std::vector<std::uint8_t> golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(golden.size(), 60u);
  const AudioBuffer buf{8000, {0.0, 0.5, -0.5, 1.0, -1.0, 0.25, -0.25, 0.001}};
  EXPECT_EQ(write_wav(buf), golden);
}

TEST(Plot, VertexCountsAndDeterminism) {
  auto count_vertices = [](const std::string& svg) {
    const std::regex re("points=\"([^\"]*)\"");
    std::smatch m;
    if (!std::regex_search(svg, m, re)) return -1;
    const std::string pts = m[1];
    if (pts.empty()) return 0;
    return static_cast<int>(std::count(pts.begin(), pts.end(), ' ')) + 1;
  };
  const auto two = render_plot(series_of({1, 2}));
  EXPECT_EQ(count_vertices(two), 2);
  EXPECT_EQ(two, render_plot(series_of({1, 2})));
  const auto gappy = render_plot(series_of({1, std::nan(""), 3, 4}));
  EXPECT_EQ(count_vertices(gappy), 3);
  size_t polylines = 0;
  for (auto pos = gappy.find("<polyline"); pos != std::string::npos; pos = gappy.find("<polyline", pos + 1)) ++polylines;
  EXPECT_EQ(polylines, 1u);
  EXPECT_EQ(kind_of([] { render_plot(series_of({})); }), ErrorKind::EmptySeries);
  EXPECT_EQ(kind_of([] { render_plot(series_of({1}), 32, 100); }), ErrorKind::BadSize);
}

// Properties.

TEST(SynthProperties, MappingStrictlyIncreasing) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& c : {SonifyConfig{}, log_config()}) {
    for (int i = 0; i < 1000; ++i) {
      double a = u(rng), b = u(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      ASSERT_LT(map_value_to_freq(a, c), map_value_to_freq(b, c));
    }
  }
}

TEST(SynthProperties, SamplesAlwaysWithinUnitRange) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0), t(0.0, 5.0), w(0.0, 3.0);
  SonifyConfig c;
  c.amplitude = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(20);
    for (auto& v : y) v = u(rng);
    for (double s : sonify_series(series_of(y), c).samples) ASSERT_LE(std::abs(s), 1.0);
    EventList ev;
    for (int i = 0; i < 30; ++i) ev.events.push_back({t(rng), w(rng)});
    std::sort(ev.events.begin(), ev.events.end(), [](auto& a, auto& b) { return a.time < b.time; });
    for (double s : sonify_events(ev, 1.0, c).samples) ASSERT_LE(std::abs(s), 1.0);
  }
}

TEST(SynthProperties, FrequencyFidelityAcrossRange) {
  const SonifyConfig c;
  for (double f : {220.0, 330.0, 440.0, 660.0, 880.0})
    EXPECT_NEAR(estimate_freq(render_note(f, c, 1.0)), f, 0.01 * f);
}

TEST(SynthProperties, DeterministicBytes) {
  const SonifyConfig c;
  const auto s = series_of({0.1, 0.9, 0.4, 0.6});
  EXPECT_EQ(write_wav(sonify_series(s, c)), write_wav(sonify_series(s, c)));
}
