#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sonowork/i18n.hpp"
#include "sonowork/ingest.hpp"
#include "sonowork/pipeline.hpp"
#include "sonowork/service.hpp"
#include "sonowork/synth.hpp"
#include "sonowork/training.hpp"
#include "sonowork/transform.hpp"
#include "sonowork/wav.hpp"

namespace sonowork::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Raised for problems that are the caller's fault at the flag level
/// (exit code 2) but only detectable after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// I/O failure (exit code 1).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sound flags shared by `sonify` and `events`. Only flags the user set are
/// forwarded, so defaults and validation both come from SonifyConfig.
struct SoundFlags {
  std::optional<std::string> waveform;
  std::optional<std::string> mapping;
  std::optional<double> f_min;
  std::optional<double> f_max;
  std::optional<double> note_duration;
  std::optional<unsigned> sample_rate;
  std::optional<double> amplitude;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--waveform", waveform, "Oscillator waveform")->check(CLI::IsMember({"sine", "square"}));
    cmd->add_option("--mapping", mapping, "Value-to-pitch law")->check(CLI::IsMember({"linear", "log", "logarithmic"}));
    cmd->add_option("--fmin", f_min, "Lowest frequency in Hz (default 220)");
    cmd->add_option("--fmax", f_max, "Highest frequency in Hz (default 880)");
    cmd->add_option("--note-dur", note_duration, "Seconds per data point (default 0.1)");
    cmd->add_option("--sample-rate", sample_rate, "Samples per second (default 44100)");
    cmd->add_option("--amplitude", amplitude, "Peak amplitude in (0, 1] (default 0.8)");
  }

  SonifyConfig config() const {
    nlohmann::json j = nlohmann::json::object();
    if (waveform) j["waveform"] = *waveform;
    if (mapping) j["mapping"] = *mapping;
    if (f_min) j["f_min"] = *f_min;
    if (f_max) j["f_max"] = *f_max;
    if (note_duration) j["note_duration"] = *note_duration;
    if (sample_rate) j["sample_rate"] = *sample_rate;
    if (amplitude) j["amplitude"] = *amplitude;
    return sonify_config_from_json(j);
  }
};

inline std::string read_file(const std::string& path, i18n::Lang lang) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(i18n::tr(lang, "io_read") + ": " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content, i18n::Lang lang) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError(i18n::tr(lang, "io_write") + ": " + path);
}

inline TransformSpec parse_ops(const std::string& text, i18n::Lang lang) {
  if (text.empty()) return {};
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw UsageError(i18n::tr(lang, "bad_json"));
  return transform_spec_from_json(j);
}

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

/// Runs one CLI invocation. Standard output carries results; standard error
/// carries diagnostics. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto lang = i18n::lang_from_env();

  CLI::App app{"sonowork: data sonification workbench"};
  app.require_subcommand(1);

  // sonify
  std::string input;
  std::optional<std::string> x_col, y_col, plot_path;
  std::string ops_json, out_path;
  SoundFlags sound;
  auto* sonify = app.add_subcommand("sonify", "Render a table column as a pitch-mapped WAV");
  sonify->add_option("file", input, "Input table (CSV/TSV/whitespace)")->required();
  sonify->add_option("--x", x_col, "Abscissa column (default: row index)");
  sonify->add_option("--y", y_col, "Column to sonify")->required();
  sonify->add_option("--ops", ops_json, "Transform steps as a JSON array");
  sonify->add_option("--out", out_path, "Output WAV path")->required();
  sonify->add_option("--plot", plot_path, "Also write an SVG plot");
  sound.add_to(sonify);

  // events
  double timeline = 0.0;
  SoundFlags event_sound;
  auto* events = app.add_subcommand("events", "Render timestamped events as pings");
  events->add_option("file", input, "Two-column (time, weight) file")->required();
  events->add_option("--timeline", timeline, "Output length in seconds")->required();
  events->add_option("--out", out_path, "Output WAV path")->required();
  event_sound.add_to(events);

  // transform
  auto* transform = app.add_subcommand("transform", "Apply transform steps and write a two-column CSV");
  transform->add_option("file", input, "Input table")->required();
  transform->add_option("--ops", ops_json, "Transform steps as a JSON array")->required();
  transform->add_option("--x", x_col, "Abscissa column (default: first column when the table has several)");
  transform->add_option("--y", y_col, "Column to transform (default: last column)");
  transform->add_option("--out", out_path, "Output CSV path")->required();

  // train simulate
  int block = 1;
  std::size_t count = 50;
  std::uint64_t seed = 0;
  std::optional<std::string> report_path;
  auto* train = app.add_subcommand("train", "Training-session tools");
  train->require_subcommand(1);
  auto* simulate = train->add_subcommand("simulate", "Run the machine participant over a generated block");
  simulate->add_option("--block", block, "Difficulty block 1-3")->check(CLI::Range(1, 3));
  simulate->add_option("--count", count, "Stimuli per class")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Generation seed");
  simulate->add_option("--report", report_path, "Also write the report JSON here");

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir = "sonowork-data";
  std::optional<std::string> webui_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Listen port")->envname("SONOWORK_PORT");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--data-dir", data_dir, "Persistence directory")->envname("SONOWORK_DATA_DIR");
  serve->add_option("--webui-dir", webui_dir, "Static web UI bundle served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sonify) {
      const auto table = parse_table(read_file(input, lang));
      RenderRequest req{x_col, *y_col, parse_ops(ops_json, lang), sound.config()};
      const auto series = sonification_series(table, req);
      const auto audio = sonify_series(series, req.config);
      write_file(out_path, wav_string(audio), lang);
      if (plot_path) write_file(*plot_path, render_request_plot(table, req), lang);

      double f_lo = INFINITY, f_hi = -INFINITY;
      for (double y : series.y) {
        if (std::isnan(y)) continue;
        const double f = map_value_to_freq(y, req.config);
        f_lo = std::min(f_lo, f);
        f_hi = std::max(f_hi, f);
      }
      out << i18n::tr(lang, "points") << "=" << series.size() << " " << i18n::tr(lang, "duration") << "="
          << fmt("%.3f", audio.duration()) << "s " << i18n::tr(lang, "freq_range") << "="
          << (std::isfinite(f_lo) ? fmt("%.1f", f_lo) + "-" + fmt("%.1f", f_hi) : std::string("-")) << "Hz\n";
    } else if (*events) {
      const auto list = parse_events(read_file(input, lang));
      const auto config = event_sound.config();
      const auto audio = sonify_events(list, timeline, config);
      write_file(out_path, wav_string(audio), lang);
      out << i18n::tr(lang, "events") << "=" << list.size() << " " << i18n::tr(lang, "duration") << "="
          << fmt("%.3f", audio.duration()) << "s\n";
    } else if (*transform) {
      const auto table = parse_table(read_file(input, lang));
      const auto spec = parse_ops(ops_json, lang);
      if (!y_col) y_col = table.columns.back().name;
      if (!x_col && table.columns.size() > 1 && table.columns.front().name != *y_col) x_col = table.columns.front().name;
      RenderRequest req{x_col, *y_col, spec, {}};
      const auto series = transformed_series(table, req);
      Table result;
      result.row_count = series.size();
      result.columns.push_back({x_col ? *x_col : std::string("index"), series.x});
      result.columns.push_back({result.columns.front().name == series.label ? series.label + "_out" : series.label,
                                series.y});
      write_file(out_path, write_table(result), lang);
      out << i18n::tr(lang, "wrote") << " " << out_path << " (" << series.size() << " " << i18n::tr(lang, "rows")
          << ")\n";
    } else if (*train) {
      const SonifyConfig config;
      auto state = start_session(generate_block(block, count, seed, config));
      state = advance(std::move(state), event::Begin{});
      while (state.phase != Phase::Completed) {
        state = advance(std::move(state), event::PresentationDone{});
        const Key key = synthetic_participant(*state.current());
        state = advance(std::move(state), event::KeyPress{key, 0.0});
        state = advance(std::move(state), event::FeedbackDone{});
      }
      const auto report = to_json_value(score_session(state)).dump(2);
      if (report_path) write_file(*report_path, report + "\n", lang);
      out << report << "\n";
    } else if (*serve) {
      ServiceOptions options;
      options.data_dir = data_dir;
      if (webui_dir) options.webui_dir = *webui_dir;
      Service service(options);
      err << i18n::tr(lang, "listening") << " http://" << host << ":" << port << "\n";
      if (!service.listen(host, port)) {
        err << i18n::tr(lang, "error") << ": cannot listen on " << host << ":" << port << "\n";
        return kExitFailure;
      }
    }
  } catch (const UsageError& e) {
    err << i18n::tr(lang, "error") << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << i18n::describe(e, lang) << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << i18n::tr(lang, "error") << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("sonowork");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sonowork::cli
