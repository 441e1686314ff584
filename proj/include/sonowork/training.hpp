#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sonowork/error.hpp"
#include "sonowork/ingest.hpp"
#include "sonowork/synth.hpp"
#include "sonowork/transform.hpp"

namespace sonowork {

enum class StimulusClass { Increasing, Decreasing, Sine, Square };
enum class Key { Up, Down, Left, Right };
enum class Modality { AudioOnly, AudioVisual };
enum class Phase { Intro, Presenting, AwaitingResponse, Feedback, Completed };

inline constexpr std::array kAllClasses = {StimulusClass::Increasing, StimulusClass::Decreasing, StimulusClass::Sine,
                                           StimulusClass::Square};
inline constexpr std::size_t kStimulusPoints = 64;

constexpr std::string_view to_string(StimulusClass c) {
  switch (c) {
    case StimulusClass::Increasing: return "Increasing";
    case StimulusClass::Decreasing: return "Decreasing";
    case StimulusClass::Sine: return "Sine";
    case StimulusClass::Square: return "Square";
  }
  return "?";
}

constexpr std::string_view to_string(Key k) {
  switch (k) {
    case Key::Up: return "Up";
    case Key::Down: return "Down";
    case Key::Left: return "Left";
    case Key::Right: return "Right";
  }
  return "?";
}

constexpr std::string_view to_string(Modality m) { return m == Modality::AudioOnly ? "AudioOnly" : "AudioVisual"; }

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Intro: return "Intro";
    case Phase::Presenting: return "Presenting";
    case Phase::AwaitingResponse: return "AwaitingResponse";
    case Phase::Feedback: return "Feedback";
    case Phase::Completed: return "Completed";
  }
  return "?";
}

/// Up: increasing, Down: decreasing, Left: sine, Right: square.
constexpr Key expected_key(StimulusClass c) {
  switch (c) {
    case StimulusClass::Increasing: return Key::Up;
    case StimulusClass::Decreasing: return Key::Down;
    case StimulusClass::Sine: return Key::Left;
    case StimulusClass::Square: return Key::Right;
  }
  return Key::Up;
}

/// A training item. The audio is not stored; it is re-rendered on demand
/// from the series and config, which fully determine it.
struct Stimulus {
  int id = 0;
  StimulusClass cls = StimulusClass::Increasing;
  Series series;
  Modality modality = Modality::AudioVisual;
  SonifyConfig config;

  AudioBuffer audio() const { return sonify_series(series, config); }
};

struct ResponseRecord {
  int stimulus_id = 0;
  Key key = Key::Up;
  bool correct = false;
  double latency = 0.0;  // milliseconds

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct SessionState {
  std::vector<Stimulus> stimuli;
  std::size_t cursor = 0;
  Phase phase = Phase::Intro;
  std::vector<ResponseRecord> responses;
  bool allow_skip_intro = true;
  bool allow_replay = true;

  const Stimulus* current() const { return cursor < stimuli.size() ? &stimuli[cursor] : nullptr; }
};

namespace event {
struct Begin {};
struct SkipIntro {};
struct PresentationDone {};
struct KeyPress {
  Key key = Key::Up;
  double latency = 0.0;
};
struct Replay {};
struct FeedbackDone {};
}  // namespace event

using SessionEvent = std::variant<event::Begin, event::SkipIntro, event::PresentationDone, event::KeyPress,
                                  event::Replay, event::FeedbackDone>;

inline std::string_view event_name(const SessionEvent& e) {
  static constexpr std::string_view names[] = {"Begin", "SkipIntro", "PresentationDone",
                                               "KeyPress", "Replay", "FeedbackDone"};
  return names[e.index()];
}

// Deterministic generator independent of the standard library's distribution
// implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

struct BlockProfile {
  double noise = 0.0;
  int min_periods = 3;
  int max_periods = 3;
};

inline BlockProfile block_profile(int block) {
  switch (block) {
    case 1: return {0.0, 3, 3};
    case 2: return {0.1, 3, 3};
    case 3: return {0.25, 2, 5};
    default: throw Error(ErrorKind::BadBlock, "block must be 1, 2 or 3, got " + std::to_string(block));
  }
}

/// Clean 64-point shape of a class before noise, values in [0, 1].
inline std::vector<double> clean_shape(StimulusClass cls, int periods) {
  std::vector<double> y(kStimulusPoints);
  const double n = static_cast<double>(kStimulusPoints);
  for (std::size_t i = 0; i < kStimulusPoints; ++i) {
    const double u = static_cast<double>(i) / (n - 1.0);
    const double cycles = periods * static_cast<double>(i) / n;
    switch (cls) {
      case StimulusClass::Increasing: y[i] = u; break;
      case StimulusClass::Decreasing: y[i] = 1.0 - u; break;
      case StimulusClass::Sine: y[i] = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * cycles); break;
      case StimulusClass::Square: y[i] = (cycles - std::floor(cycles)) < 0.5 ? 1.0 : 0.0; break;
    }
  }
  return y;
}

/// Balanced, seed-shuffled block of stimuli. Block 1 is clean, block 2 adds
/// uniform noise of amplitude 0.1, block 3 adds 0.25 and draws 2-5 periods
/// for the periodic classes. Every series is normalized to [0, 1].
inline std::vector<Stimulus> generate_block(int block, std::size_t per_class_count, std::uint64_t seed,
                                            const SonifyConfig& config, Modality modality = Modality::AudioVisual) {
  const auto profile = block_profile(block);
  if (per_class_count < 1) throw Error(ErrorKind::BadBlock, "per_class_count must be at least 1");
  validate(config);

  std::vector<StimulusClass> classes;
  classes.reserve(per_class_count * kAllClasses.size());
  for (auto c : kAllClasses) classes.insert(classes.end(), per_class_count, c);

  SplitMix64 rng(seed);
  for (std::size_t i = classes.size() - 1; i > 0; --i) std::swap(classes[i], classes[rng.below(i + 1)]);

  std::vector<Stimulus> out;
  out.reserve(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const int span = profile.max_periods - profile.min_periods + 1;
    const int periods = profile.min_periods + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    Series s;
    s.label = std::string(to_string(classes[k]));
    s.y = clean_shape(classes[k], periods);
    s.x.resize(kStimulusPoints);
    for (std::size_t i = 0; i < kStimulusPoints; ++i) {
      s.x[i] = static_cast<double>(i);
      if (profile.noise > 0.0) s.y[i] += profile.noise * (2.0 * rng.uniform() - 1.0);
    }
    out.push_back({static_cast<int>(k), classes[k], normalize(std::move(s)), modality, config});
  }
  return out;
}

inline SessionState start_session(std::vector<Stimulus> stimuli, bool allow_skip_intro = true,
                                   bool allow_replay = true) {
  SessionState s;
  s.stimuli = std::move(stimuli);
  s.allow_skip_intro = allow_skip_intro;
  s.allow_replay = allow_replay;
  return s;
}

/// The trial state machine:
///   Intro --Begin|SkipIntro--> Presenting --PresentationDone--> AwaitingResponse
///   AwaitingResponse --Replay--> Presenting (same stimulus)
///   AwaitingResponse --KeyPress--> Feedback (response recorded)
///   Feedback --FeedbackDone--> Presenting (next) | Completed
inline SessionState advance(SessionState state, const SessionEvent& ev) {
  auto illegal = [&]() -> Error {
    return Error(ErrorKind::IllegalEvent, "event " + std::string(event_name(ev)) + " is not allowed in phase " +
                                              std::string(to_string(state.phase)));
  };
  auto enter_first = [&] { state.phase = state.stimuli.empty() ? Phase::Completed : Phase::Presenting; };

  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, event::Begin>) {
          if (state.phase != Phase::Intro) throw illegal();
          enter_first();
        } else if constexpr (std::is_same_v<T, event::SkipIntro>) {
          if (state.phase != Phase::Intro) throw illegal();
          if (!state.allow_skip_intro) throw Error(ErrorKind::SkipDisabled, "skipping the introduction is disabled");
          enter_first();
        } else if constexpr (std::is_same_v<T, event::PresentationDone>) {
          if (state.phase != Phase::Presenting) throw illegal();
          state.phase = Phase::AwaitingResponse;
        } else if constexpr (std::is_same_v<T, event::Replay>) {
          if (state.phase != Phase::AwaitingResponse) throw illegal();
          if (!state.allow_replay) throw Error(ErrorKind::ReplayDisabled, "replay is disabled for this session");
          state.phase = Phase::Presenting;
        } else if constexpr (std::is_same_v<T, event::KeyPress>) {
          if (state.phase != Phase::AwaitingResponse) throw illegal();
          if (!std::isfinite(e.latency) || e.latency < 0.0)
            throw Error(ErrorKind::BadEvent, "latency must be a non-negative number of milliseconds");
          const auto& stim = state.stimuli[state.cursor];
          state.responses.push_back({stim.id, e.key, e.key == expected_key(stim.cls), e.latency});
          state.phase = Phase::Feedback;
        } else {
          if (state.phase != Phase::Feedback) throw illegal();
          ++state.cursor;
          state.phase = state.cursor < state.stimuli.size() ? Phase::Presenting : Phase::Completed;
        }
      },
      ev);
  return state;
}

inline std::string_view feedback_text(const ResponseRecord& r) { return r.correct ? "Correct" : "Incorrect"; }

struct ClassScore {
  int n = 0;
  int correct = 0;
  double pct = 0.0;
};

struct SessionReport {
  int total = 0;
  int correct = 0;
  double overall_pct = 0.0;
  std::map<StimulusClass, ClassScore> per_class;
  double median_latency_ms = 0.0;

  /// Percentage rounded to the nearest integer, e.g. "77%".
  std::string display_pct() const { return std::to_string(std::lround(overall_pct)) + "%"; }
};

inline SessionReport score_session(const SessionState& state) {
  if (state.phase != Phase::Completed) throw Error(ErrorKind::NotCompleted, "session is not completed");
  if (state.responses.empty()) throw Error(ErrorKind::EmptySession, "session has no responses");

  std::map<int, StimulusClass> class_of;
  for (const auto& s : state.stimuli) class_of[s.id] = s.cls;

  SessionReport r;
  std::vector<double> latencies;
  for (const auto& rec : state.responses) {
    ++r.total;
    auto& cs = r.per_class[class_of.at(rec.stimulus_id)];
    ++cs.n;
    if (rec.correct) {
      ++r.correct;
      ++cs.correct;
    }
    latencies.push_back(rec.latency);
  }
  r.overall_pct = 100.0 * r.correct / r.total;
  for (auto& [cls, cs] : r.per_class) cs.pct = 100.0 * cs.correct / cs.n;

  std::sort(latencies.begin(), latencies.end());
  const auto m = latencies.size() / 2;
  r.median_latency_ms = latencies.size() % 2 ? latencies[m] : 0.5 * (latencies[m - 1] + latencies[m]);
  return r;
}

// Machine participant.

struct AudioFeatures {
  std::vector<double> freq_track;  // Hz per note segment
  double trend = 0.0;              // Pearson correlation of the track with time
  double kurtosis = 0.0;           // of the track values
};

inline AudioFeatures audio_features(const AudioBuffer& audio, std::size_t samples_per_note) {
  AudioFeatures f;
  if (samples_per_note < 2) return f;
  for (std::size_t b = 0; b + samples_per_note <= audio.size(); b += samples_per_note)
    f.freq_track.push_back(estimate_freq(audio, b, b + samples_per_note));
  const std::size_t n = f.freq_track.size();
  if (n < 2) return f;

  double mean_t = 0.0, mean_f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_t += static_cast<double>(i);
    mean_f += f.freq_track[i];
  }
  mean_t /= n;
  mean_f /= n;
  double stt = 0.0, sff = 0.0, stf = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - mean_t;
    const double df = f.freq_track[i] - mean_f;
    stt += dt * dt;
    sff += df * df;
    stf += dt * df;
    m4 += df * df * df * df;
  }
  if (sff > 0.0) {
    f.trend = stf / std::sqrt(stt * sff);
    const double m2 = sff / n;
    f.kurtosis = (m4 / n) / (m2 * m2);
  }
  return f;
}

/// Classifies a stimulus from its audio alone. A strongly trending pitch
/// track is a ramp; otherwise a two-level track (kurtosis near 1) is a square
/// and a sinusoidal one (kurtosis near 1.5) a sine.
inline Key classify_audio(const AudioBuffer& audio, std::size_t samples_per_note) {
  const auto f = audio_features(audio, samples_per_note);
  if (f.trend >= 0.75) return Key::Up;
  if (f.trend <= -0.75) return Key::Down;
  return f.kurtosis < 1.4 ? Key::Right : Key::Left;
}

inline Key synthetic_participant(const Stimulus& stimulus) {
  return classify_audio(stimulus.audio(), sample_count(stimulus.config.note_duration, stimulus.config.sample_rate));
}

// JSON

namespace detail {

template <typename Enum, std::size_t N>
Enum enum_from_string(const nlohmann::json& j, const std::array<Enum, N>& values, const char* what) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    for (auto v : values)
      if (to_string(v) == s) return v;
  }
  throw Error(ErrorKind::BadEvent, std::string("invalid ") + what + ": " + j.dump());
}

inline constexpr std::array kAllKeys = {Key::Up, Key::Down, Key::Left, Key::Right};
inline constexpr std::array kAllPhases = {Phase::Intro, Phase::Presenting, Phase::AwaitingResponse, Phase::Feedback,
                                          Phase::Completed};
inline constexpr std::array kAllModalities = {Modality::AudioOnly, Modality::AudioVisual};

inline nlohmann::json doubles_to_json(const std::vector<double>& v) {
  auto arr = nlohmann::json::array();
  for (double d : v) arr.push_back(std::isfinite(d) ? nlohmann::json(d) : nlohmann::json(nullptr));
  return arr;
}

inline std::vector<double> doubles_from_json(const nlohmann::json& j) {
  std::vector<double> v;
  for (const auto& e : j) v.push_back(e.is_null() ? kNaN : e.get<double>());
  return v;
}

}  // namespace detail

inline Key key_from_json(const nlohmann::json& j) { return detail::enum_from_string(j, detail::kAllKeys, "key"); }
inline Modality modality_from_json(const nlohmann::json& j) {
  return detail::enum_from_string(j, detail::kAllModalities, "modality");
}

inline nlohmann::json to_json_value(const Series& s) {
  return {{"x", detail::doubles_to_json(s.x)}, {"y", detail::doubles_to_json(s.y)}, {"label", s.label}};
}

inline Series series_from_json(const nlohmann::json& j) {
  return {detail::doubles_from_json(j.at("x")), detail::doubles_from_json(j.at("y")), j.at("label").get<std::string>()};
}

inline nlohmann::json to_json_value(const ResponseRecord& r) {
  return {{"stimulus_id", r.stimulus_id}, {"key", to_string(r.key)}, {"correct", r.correct}, {"latency", r.latency}};
}

inline nlohmann::json to_json_value(const SessionState& s) {
  auto stimuli = nlohmann::json::array();
  for (const auto& st : s.stimuli)
    stimuli.push_back({{"id", st.id},
                       {"class", to_string(st.cls)},
                       {"modality", to_string(st.modality)},
                       {"series", to_json_value(st.series)},
                       {"config", to_json_value(st.config)}});
  auto responses = nlohmann::json::array();
  for (const auto& r : s.responses) responses.push_back(to_json_value(r));
  return {{"stimuli", std::move(stimuli)},
          {"cursor", s.cursor},
          {"phase", to_string(s.phase)},
          {"responses", std::move(responses)},
          {"allow_skip_intro", s.allow_skip_intro},
          {"allow_replay", s.allow_replay}};
}

inline SessionState session_state_from_json(const nlohmann::json& j) {
  SessionState s;
  for (const auto& st : j.at("stimuli")) {
    Stimulus stim;
    stim.id = st.at("id").get<int>();
    stim.cls = detail::enum_from_string(st.at("class"), kAllClasses, "class");
    stim.modality = modality_from_json(st.at("modality"));
    stim.series = series_from_json(st.at("series"));
    stim.config = sonify_config_from_json(st.at("config"));
    s.stimuli.push_back(std::move(stim));
  }
  s.cursor = j.at("cursor").get<std::size_t>();
  s.phase = detail::enum_from_string(j.at("phase"), detail::kAllPhases, "phase");
  for (const auto& r : j.at("responses"))
    s.responses.push_back({r.at("stimulus_id").get<int>(), key_from_json(r.at("key")), r.at("correct").get<bool>(),
                           r.at("latency").get<double>()});
  s.allow_skip_intro = j.at("allow_skip_intro").get<bool>();
  s.allow_replay = j.at("allow_replay").get<bool>();
  return s;
}

/// {"type": "KeyPress", "key": "Up", "latency": 350} and the like.
inline SessionEvent session_event_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw Error(ErrorKind::BadEvent, "event must be an object with a string 'type'");
  const auto type = j["type"].get<std::string>();
  if (type == "Begin") return event::Begin{};
  if (type == "SkipIntro") return event::SkipIntro{};
  if (type == "PresentationDone") return event::PresentationDone{};
  if (type == "Replay") return event::Replay{};
  if (type == "FeedbackDone") return event::FeedbackDone{};
  if (type == "KeyPress") {
    double latency = 0.0;
    if (j.contains("latency")) {
      if (!j["latency"].is_number()) throw Error(ErrorKind::BadEvent, "'latency' must be a number");
      latency = j["latency"].get<double>();
    }
    return event::KeyPress{key_from_json(j.value("key", nlohmann::json())), latency};
  }
  throw Error(ErrorKind::BadEvent, "unknown event type '" + type + "'");
}

inline nlohmann::json to_json_value(const SessionEvent& e) {
  nlohmann::json j = {{"type", event_name(e)}};
  if (const auto* kp = std::get_if<event::KeyPress>(&e)) {
    j["key"] = to_string(kp->key);
    j["latency"] = kp->latency;
  }
  return j;
}

inline nlohmann::json to_json_value(const SessionReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, cs] : r.per_class)
    per_class[std::string(to_string(cls))] = {{"n", cs.n}, {"correct", cs.correct}, {"pct", cs.pct}};
  return {{"total", r.total},
          {"correct", r.correct},
          {"overall_pct", r.overall_pct},
          {"overall_display", r.display_pct()},
          {"per_class", std::move(per_class)},
          {"median_latency_ms", r.median_latency_ms}};
}

}  // namespace sonowork
