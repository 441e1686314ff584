#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sonowork/training.hpp"
#include "sonowork/wav.hpp"

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

SessionState small_session(bool skip = true, bool replay = true) {
  return start_session(generate_block(1, 1, 42, SonifyConfig{}), skip, replay);
}

}  // namespace

TEST(ExpectedKey, MatchesTrainingScreenMapping) {
  EXPECT_EQ(expected_key(StimulusClass::Increasing), Key::Up);
  EXPECT_EQ(expected_key(StimulusClass::Decreasing), Key::Down);
  EXPECT_EQ(expected_key(StimulusClass::Sine), Key::Left);
  EXPECT_EQ(expected_key(StimulusClass::Square), Key::Right);
  std::set<Key> keys;
  for (auto c : kAllClasses) keys.insert(expected_key(c));
  EXPECT_EQ(keys.size(), 4u);
}

TEST(GenerateBlock, BalancedAndDeterministic) {
  const SonifyConfig c;
  const auto a = generate_block(1, 3, 7, c);
  const auto b = generate_block(1, 3, 7, c);
  ASSERT_EQ(a.size(), 12u);
  std::map<StimulusClass, int> counts;
  for (const auto& s : a) ++counts[s.cls];
  ASSERT_EQ(counts.size(), 4u);
  for (auto [cls, n] : counts) EXPECT_EQ(n, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].cls, b[i].cls);
    EXPECT_EQ(a[i].series.y, b[i].series.y);
    EXPECT_EQ(write_wav(a[i].audio()), write_wav(b[i].audio()));
  }
}

TEST(GenerateBlock, SeedChangesOrder) {
  const SonifyConfig c;
  const auto a = generate_block(1, 10, 1, c);
  const auto b = generate_block(1, 10, 2, c);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].cls != b[i].cls;
  EXPECT_TRUE(differs);
}

TEST(GenerateBlock, SeriesAreNormalizedWith64Points) {
  for (int block : {1, 2, 3})
    for (const auto& s : generate_block(block, 4, 3, SonifyConfig{})) {
      ASSERT_EQ(s.series.size(), kStimulusPoints);
      const auto [lo, hi] = std::minmax_element(s.series.y.begin(), s.series.y.end());
      EXPECT_EQ(*lo, 0.0);
      EXPECT_EQ(*hi, 1.0);
    }
}

TEST(GenerateBlock, NoisyIncreasingHasPositiveSlope) {
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (const auto& s : generate_block(2, 5, seed, SonifyConfig{})) {
      if (s.cls == StimulusClass::Increasing) {
        EXPECT_GT(oracle::least_squares_slope(s.series.y), 0.0);
      }
      if (s.cls == StimulusClass::Decreasing) {
        EXPECT_LT(oracle::least_squares_slope(s.series.y), 0.0);
      }
    }
}

TEST(GenerateBlock, Errors) {
  EXPECT_EQ(kind_of([] { generate_block(4, 1, 0, SonifyConfig{}); }), ErrorKind::BadBlock);
  EXPECT_EQ(kind_of([] { generate_block(0, 1, 0, SonifyConfig{}); }), ErrorKind::BadBlock);
  EXPECT_EQ(kind_of([] { generate_block(1, 0, 0, SonifyConfig{}); }), ErrorKind::BadBlock);
}

TEST(Advance, HappyPath) {
  auto s = small_session();
  s = advance(s, event::Begin{});
  EXPECT_EQ(s.phase, Phase::Presenting);
  s = advance(s, event::PresentationDone{});
  EXPECT_EQ(s.phase, Phase::AwaitingResponse);
  const Key right = expected_key(s.current()->cls);
  s = advance(s, event::KeyPress{right, 512});
  EXPECT_EQ(s.phase, Phase::Feedback);
  ASSERT_EQ(s.responses.size(), 1u);
  EXPECT_TRUE(s.responses[0].correct);
  EXPECT_EQ(feedback_text(s.responses[0]), "Correct");
  EXPECT_EQ(s.responses[0].latency, 512);
  s = advance(s, event::FeedbackDone{});
  EXPECT_EQ(s.cursor, 1u);
  EXPECT_EQ(s.phase, Phase::Presenting);
}

TEST(Advance, WrongKeyIsIncorrect) {
  auto s = advance(advance(small_session(), event::Begin{}), event::PresentationDone{});
  const Key wrong = expected_key(s.current()->cls) == Key::Up ? Key::Down : Key::Up;
  s = advance(s, event::KeyPress{wrong, 0});
  EXPECT_FALSE(s.responses[0].correct);
  EXPECT_EQ(feedback_text(s.responses[0]), "Incorrect");
}

TEST(Advance, IllegalEvents) {
  const auto intro = small_session();
  EXPECT_EQ(kind_of([&] { advance(intro, event::KeyPress{Key::Up, 0}); }), ErrorKind::IllegalEvent);
  EXPECT_EQ(kind_of([&] { advance(intro, event::PresentationDone{}); }), ErrorKind::IllegalEvent);
  EXPECT_EQ(kind_of([&] { advance(intro, event::FeedbackDone{}); }), ErrorKind::IllegalEvent);
  EXPECT_EQ(kind_of([&] { advance(intro, event::Replay{}); }), ErrorKind::IllegalEvent);
  const auto presenting = advance(intro, event::Begin{});
  EXPECT_EQ(kind_of([&] { advance(presenting, event::Begin{}); }), ErrorKind::IllegalEvent);
  EXPECT_EQ(kind_of([&] { advance(presenting, event::KeyPress{Key::Up, 0}); }), ErrorKind::IllegalEvent);
  const auto awaiting = advance(presenting, event::PresentationDone{});
  EXPECT_EQ(kind_of([&] { advance(awaiting, event::KeyPress{Key::Up, -1}); }), ErrorKind::BadEvent);
}

TEST(Advance, SkipAndReplayFlags) {
  EXPECT_EQ(advance(small_session(true, true), event::SkipIntro{}).phase, Phase::Presenting);
  EXPECT_EQ(kind_of([] { advance(small_session(false, true), event::SkipIntro{}); }), ErrorKind::SkipDisabled);

  auto awaiting = advance(advance(small_session(), event::Begin{}), event::PresentationDone{});
  const auto replayed = advance(awaiting, event::Replay{});
  EXPECT_EQ(replayed.phase, Phase::Presenting);
  EXPECT_EQ(replayed.cursor, awaiting.cursor);
  EXPECT_EQ(replayed.responses.size(), awaiting.responses.size());

  auto no_replay = advance(advance(small_session(true, false), event::Begin{}), event::PresentationDone{});
  EXPECT_EQ(kind_of([&] { advance(no_replay, event::Replay{}); }), ErrorKind::ReplayDisabled);
}

TEST(Advance, CompletesAfterLastFeedback) {
  auto s = advance(small_session(), event::Begin{});
  for (std::size_t i = 0; i < 4; ++i) {
    s = advance(s, event::PresentationDone{});
    s = advance(s, event::KeyPress{Key::Left, 100});
    s = advance(s, event::FeedbackDone{});
  }
  EXPECT_EQ(s.phase, Phase::Completed);
  EXPECT_EQ(s.responses.size(), 4u);
  EXPECT_EQ(kind_of([&] { advance(s, event::FeedbackDone{}); }), ErrorKind::IllegalEvent);
}

TEST(Advance, EmptySessionCompletesImmediately) {
  auto s = advance(start_session({}), event::Begin{});
  EXPECT_EQ(s.phase, Phase::Completed);
  EXPECT_EQ(kind_of([&] { score_session(s); }), ErrorKind::EmptySession);
}

namespace {

// Session of `n` trials answered with the given correctness pattern.
SessionState answered(const std::vector<bool>& correct, const std::vector<double>& latencies) {
  auto stimuli = generate_block(1, (correct.size() + 3) / 4, 1, SonifyConfig{});
  stimuli.resize(correct.size());
  auto s = advance(start_session(std::move(stimuli)), event::Begin{});
  for (std::size_t i = 0; i < correct.size(); ++i) {
    s = advance(s, event::PresentationDone{});
    const Key want = expected_key(s.current()->cls);
    const Key other = want == Key::Up ? Key::Down : Key::Up;
    s = advance(s, event::KeyPress{correct[i] ? want : other, latencies[i]});
    s = advance(s, event::FeedbackDone{});
  }
  return s;
}

}  // namespace

TEST(ScoreSession, TenOfThirteenDisplays77) {
  std::vector<bool> pattern(13, true);
  pattern[2] = pattern[7] = pattern[11] = false;
  std::vector<double> lat(13);
  for (int i = 0; i < 13; ++i) lat[i] = 100.0 * (i + 1);
  const auto r = score_session(answered(pattern, lat));
  EXPECT_EQ(r.total, 13);
  EXPECT_EQ(r.correct, 10);
  EXPECT_NEAR(r.overall_pct, 76.923076923, 1e-6);
  EXPECT_EQ(r.display_pct(), "77%");
  EXPECT_EQ(r.median_latency_ms, 700.0);
}

TEST(ScoreSession, ZeroOfFour) {
  const auto r = score_session(answered({false, false, false, false}, {1, 2, 3, 4}));
  EXPECT_EQ(r.overall_pct, 0.0);
  EXPECT_EQ(r.display_pct(), "0%");
  EXPECT_EQ(r.median_latency_ms, 2.5);
}

TEST(ScoreSession, NotCompleted) {
  EXPECT_EQ(kind_of([] { score_session(small_session()); }), ErrorKind::NotCompleted);
}

TEST(ScoreSession, PerClassRecountOracle) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<bool> pattern(n);
    std::vector<double> lat(n);
    for (std::size_t i = 0; i < n; ++i) {
      pattern[i] = rng() % 3 != 0;
      lat[i] = static_cast<double>(rng() % 2000);
    }
    const auto state = answered(pattern, lat);
    const auto r = score_session(state);

    // Recount straight from the raw responses.
    std::map<StimulusClass, std::pair<int, int>> recount;
    for (const auto& rec : state.responses) {
      const auto cls = state.stimuli[static_cast<std::size_t>(rec.stimulus_id)].cls;
      ++recount[cls].first;
      recount[cls].second += rec.correct;
    }
    int sum_n = 0, sum_correct = 0;
    for (const auto& [cls, cs] : r.per_class) {
      EXPECT_EQ(cs.n, recount[cls].first);
      EXPECT_EQ(cs.correct, recount[cls].second);
      sum_n += cs.n;
      sum_correct += cs.correct;
    }
    EXPECT_EQ(sum_n, r.total);
    EXPECT_EQ(sum_correct, r.correct);
    // Overall accuracy equals the n-weighted mean of per-class accuracies,
    // accumulated as an exact fraction num / den.
    long long num = 0, den = 1;
    for (const auto& [cls, cs] : r.per_class) {
      num = num * cs.n + den * cs.n * cs.correct;  // + n_c * (correct_c / n_c)
      den *= cs.n;
      const long long g = std::gcd(num, den);
      if (g > 1) {
        num /= g;
        den /= g;
      }
    }
    EXPECT_EQ(num, static_cast<long long>(r.correct) * den);
    double weighted_pct = 0.0;
    for (const auto& [cls, cs] : r.per_class) weighted_pct += cs.n * cs.pct;
    EXPECT_NEAR(weighted_pct / r.total, r.overall_pct, 1e-9);
  }
}

TEST(SessionJson, RoundTripIsLossless) {
  auto s = small_session(false, true);
  s = advance(advance(advance(s, event::Begin{}), event::PresentationDone{}), event::KeyPress{Key::Right, 321.5});
  const auto j = to_json_value(s);
  const auto back = session_state_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json_value(back), j);
  EXPECT_EQ(back.responses, s.responses);
  EXPECT_EQ(back.phase, Phase::Feedback);
  EXPECT_EQ(write_wav(back.stimuli[2].audio()), write_wav(s.stimuli[2].audio()));
}

TEST(SessionJson, Events) {
  const auto e = session_event_from_json({{"type", "KeyPress"}, {"key", "Left"}, {"latency", 250}});
  ASSERT_TRUE(std::holds_alternative<event::KeyPress>(e));
  EXPECT_EQ(std::get<event::KeyPress>(e).key, Key::Left);
  EXPECT_EQ(to_json_value(e)["latency"], 250.0);
  EXPECT_EQ(kind_of([] { session_event_from_json({{"type", "Jump"}}); }), ErrorKind::BadEvent);
  EXPECT_EQ(kind_of([] { session_event_from_json({{"type", "KeyPress"}, {"key", "Space"}}); }), ErrorKind::BadEvent);
}

TEST(SyntheticParticipant, CleanStimuliClassified) {
  for (const auto& s : generate_block(1, 3, 5, SonifyConfig{})) EXPECT_EQ(synthetic_participant(s), expected_key(s.cls));
}

// Random walks over the event alphabet; every accepted transition must keep
// the bookkeeping invariants.
TEST(SessionProperties, RandomEventWalks) {
  std::mt19937_64 rng(123);
  const std::vector<SessionEvent> alphabet = {event::Begin{},           event::SkipIntro{},
                                              event::PresentationDone{}, event::KeyPress{Key::Up, 10},
                                              event::KeyPress{Key::Left, 20}, event::Replay{},
                                              event::FeedbackDone{}};
  const auto stimuli = generate_block(1, 2, 9, SonifyConfig{});
  for (int walk = 0; walk < 200; ++walk) {
    auto s = start_session(stimuli, rng() % 2, rng() % 2);
    std::set<int> presented;
    for (int step = 0; step < 200 && s.phase != Phase::Completed; ++step) {
      const auto& ev = alphabet[rng() % alphabet.size()];
      try {
        s = advance(s, ev);
      } catch (const Error&) {
        continue;
      }
      if (s.phase == Phase::Presenting) presented.insert(s.current()->id);
      const std::size_t expected_responses = s.cursor + (s.phase == Phase::Feedback ? 1 : 0);
      ASSERT_EQ(s.responses.size(), expected_responses);
      ASSERT_LE(s.responses.size(), s.cursor + 1);
      for (const auto& r : s.responses) ASSERT_TRUE(presented.count(r.stimulus_id));
      ASSERT_EQ(s.phase == Phase::Completed, s.responses.size() == stimuli.size() && s.phase != Phase::Feedback);
    }
  }
}
