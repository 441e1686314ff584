#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "sonowork/error.hpp"
#include "sonowork/ingest.hpp"
#include "sonowork/pipeline.hpp"
#include "sonowork/plot.hpp"
#include "sonowork/synth.hpp"
#include "sonowork/training.hpp"
#include "sonowork/transform.hpp"
#include "sonowork/wav.hpp"

namespace sonowork {

namespace fs = std::filesystem;
using nlohmann::json;

struct StoredDataset {
  std::string id;
  std::string name;
  Table table;
  std::string created_at;
};

struct StoredSession {
  std::string id;
  SessionState state;
  std::string created_at;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json_value(const Table& t) {
  auto cols = json::array();
  for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"values", detail::doubles_to_json(c.values)}});
  return {{"columns", std::move(cols)}, {"row_count", t.row_count}};
}

inline Table table_from_json(const json& j) {
  Table t;
  for (const auto& c : j.at("columns")) t.columns.push_back({c.at("name").get<std::string>(), detail::doubles_from_json(c.at("values"))});
  t.row_count = j.at("row_count").get<std::size_t>();
  return t;
}

/// JSON-file persistence under a data directory:
///   <root>/datasets/<id>.json   (append-only)
///   <root>/sessions/<id>.json   (rewritten per event)
/// Every write goes to a temporary file first and is renamed into place.
class Store {
 public:
  explicit Store(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "datasets");
    fs::create_directories(root_ / "sessions");
  }

  const fs::path& root() const { return root_; }

  StoredDataset add_dataset(std::string name, Table table) {
    StoredDataset d{new_id(), std::move(name), std::move(table), utc_timestamp()};
    write_atomic(dataset_path(d.id),
                 json{{"id", d.id}, {"name", d.name}, {"created_at", d.created_at}, {"table", to_json_value(d.table)}}.dump());
    return d;
  }

  std::optional<StoredDataset> dataset(const std::string& id) const {
    const auto j = read_json(dataset_path(id));
    if (!j) return std::nullopt;
    return StoredDataset{j->at("id").get<std::string>(), j->at("name").get<std::string>(),
                         table_from_json(j->at("table")), j->at("created_at").get<std::string>()};
  }

  StoredSession add_session(SessionState state) {
    StoredSession s{new_id(), std::move(state), utc_timestamp()};
    save_session(s);
    return s;
  }

  std::optional<StoredSession> session(const std::string& id) const {
    const auto j = read_json(session_path(id));
    if (!j) return std::nullopt;
    return StoredSession{j->at("id").get<std::string>(), session_state_from_json(j->at("state")),
                         j->at("created_at").get<std::string>()};
  }

  void save_session(const StoredSession& s) {
    write_atomic(session_path(s.id),
                 json{{"id", s.id}, {"created_at", s.created_at}, {"state", to_json_value(s.state)}}.dump());
  }

  /// Exclusive lock serializing events for one session.
  std::shared_ptr<std::mutex> session_lock(const std::string& id) {
    std::lock_guard guard(locks_mutex_);
    auto& m = locks_[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  static bool valid_id(const std::string& id) {
    return id.size() == 16 && id.find_first_not_of("0123456789abcdef") == std::string::npos;
  }

 private:
  fs::path dataset_path(const std::string& id) const { return root_ / "datasets" / (id + ".json"); }
  fs::path session_path(const std::string& id) const { return root_ / "sessions" / (id + ".json"); }

  std::string new_id() {
    std::lock_guard guard(id_mutex_);
    static constexpr char hex[] = "0123456789abcdef";
    while (true) {
      std::string id;
      for (int i = 0; i < 16; ++i) id += hex[rng_() & 0xF];
      if (!fs::exists(dataset_path(id)) && !fs::exists(session_path(id))) return id;
    }
  }

  void write_atomic(const fs::path& target, const std::string& content) {
    const auto tmp = target.parent_path() / (target.filename().string() + ".tmp" + std::to_string(tmp_counter_++));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.flush();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
  }

  std::optional<json> read_json(const fs::path& p) const {
    if (!valid_id(p.stem().string())) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return json::parse(ss.str());
  }

  fs::path root_;
  std::mutex id_mutex_;
  std::mt19937_64 rng_{std::random_device{}()};
  std::atomic<std::uint64_t> tmp_counter_{0};
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

struct ServiceOptions {
  fs::path data_dir = "sonowork-data";
  std::optional<fs::path> webui_dir;
};

/// HTTP facade over the core modules. Error bodies are
/// {"code": ..., "message": ..., "detail": {...}}.
class Service {
 public:
  explicit Service(const ServiceOptions& options) : store_(options.data_dir) {
    server_.set_payload_max_length(64u << 20);
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    if (options.webui_dir && fs::is_directory(*options.webui_dir))
      server_.set_mount_point("/", options.webui_dir->string());
    routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  httplib::Server& server() { return server_; }
  Store& store() { return store_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  static void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                         json detail = json::object()) {
    res.status = status;
    res.set_content(json{{"code", code}, {"message", message}, {"detail", std::move(detail)}}.dump(),
                    "application/json");
  }

  static int status_for(ErrorKind k) {
    switch (k) {
      case ErrorKind::EmptyInput:
      case ErrorKind::RaggedRows:
      case ErrorKind::NonNumericCell:
      case ErrorKind::BadHeader:
      case ErrorKind::NegativeWeight:
      case ErrorKind::BadEvent:
        return 400;
      case ErrorKind::IllegalEvent:
      case ErrorKind::SkipDisabled:
      case ErrorKind::ReplayDisabled:
      case ErrorKind::NotCompleted:
        return 409;
      default:
        return 422;
    }
  }

  static void send_error(httplib::Response& res, const Error& e) {
    json detail = json::object();
    if (e.row) detail["row"] = *e.row;
    if (e.column) detail["column"] = *e.column;
    if (e.step) detail["step"] = *e.step;
    send_error(res, status_for(e.kind()), e.code(), e.what(), std::move(detail));
  }

  template <typename F>
  static httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const json::exception& e) {
        send_error(res, 400, "BadRequest", std::string("malformed JSON request: ") + e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
      }
    };
  }

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static std::string id_param(const httplib::Request& req) {
    const auto it = req.path_params.find("id");
    return it == req.path_params.end() ? std::string() : it->second;
  }

  std::optional<StoredDataset> find_dataset(const std::string& id, httplib::Response& res) {
    auto d = Store::valid_id(id) ? store_.dataset(id) : std::nullopt;
    if (!d) send_error(res, 404, "NotFound", "unknown dataset '" + id + "'");
    return d;
  }

  std::optional<StoredSession> find_session(const std::string& id, httplib::Response& res) {
    auto s = Store::valid_id(id) ? store_.session(id) : std::nullopt;
    if (!s) send_error(res, 404, "NotFound", "unknown session '" + id + "'");
    return s;
  }

  /// Parses the body shared by /api/sonify and /api/plot. Returns nullopt
  /// after writing an error response.
  std::optional<std::pair<StoredDataset, RenderRequest>> render_request(const httplib::Request& req,
                                                                       httplib::Response& res) {
    const auto body = json::parse(req.body);
    if (!body.is_object() || !body.contains("dataset_id") || !body["dataset_id"].is_string() ||
        !body.contains("y_col") || !body["y_col"].is_string()) {
      send_error(res, 400, "BadRequest", "body needs string fields 'dataset_id' and 'y_col'");
      return std::nullopt;
    }
    auto dataset = find_dataset(body["dataset_id"].get<std::string>(), res);
    if (!dataset) return std::nullopt;
    RenderRequest r;
    r.y_col = body["y_col"].get<std::string>();
    if (body.contains("x_col") && body["x_col"].is_string()) r.x_col = body["x_col"].get<std::string>();
    r.transform = transform_spec_from_json(body.value("transform", json::array()));
    r.config = sonify_config_from_json(body.value("config", json::object()));
    return std::make_pair(std::move(*dataset), std::move(r));
  }

  void routes() {
    server_.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server_.Post("/api/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string name = req.has_param("name") ? req.get_param_value("name") : "dataset";
      std::string text = req.body;
      ParseOptions opts;
      if (req.get_header_value("Content-Type").starts_with("application/json")) {
        const auto body = json::parse(req.body);
        name = body.value("name", name);
        text = body.at("text").get<std::string>();
      }
      if (req.has_param("delimiter") && !req.get_param_value("delimiter").empty()) {
        const auto d = req.get_param_value("delimiter");
        opts.delimiter = d == "tab" ? '\t' : (d == "whitespace" ? '\0' : d.front());
      }
      if (req.has_param("has_header")) opts.has_header = req.get_param_value("has_header") == "true";
      opts.decimal_comma = req.get_param_value("decimal_comma") == "true";

      auto stored = store_.add_dataset(std::move(name), parse_table(text, opts));
      send_json(res, 201, {{"id", stored.id},
                           {"name", stored.name},
                           {"columns", stored.table.column_names()},
                           {"row_count", stored.table.row_count}});
    }));

    server_.Get("/api/datasets/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto d = find_dataset(id_param(req), res);
      if (!d) return;
      auto body = to_json_value(d->table);
      body["id"] = d->id;
      body["name"] = d->name;
      body["created_at"] = d->created_at;
      send_json(res, 200, body);
    }));

    server_.Post("/api/sonify", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto parsed = render_request(req, res);
      if (!parsed) return;
      res.set_content(wav_string(render_sonification(parsed->first.table, parsed->second)), "audio/wav");
    }));

    server_.Post("/api/plot", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto parsed = render_request(req, res);
      if (!parsed) return;
      res.set_content(render_request_plot(parsed->first.table, parsed->second), "image/svg+xml");
    }));

    server_.Post("/api/training/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = req.body.empty() ? json::object() : json::parse(req.body);
      const int block = body.value("block", 1);
      const auto count = body.value("per_class_count", std::size_t{3});
      const auto seed = body.value("seed", std::uint64_t{0});
      const auto modality = modality_from_json(body.value("modality", json("AudioVisual")));
      const auto config = sonify_config_from_json(body.value("config", json::object()));
      auto state = start_session(generate_block(block, count, seed, config, modality),
                                 body.value("allow_skip_intro", true), body.value("allow_replay", true));
      const auto stored = store_.add_session(std::move(state));
      send_json(res, 201, {{"id", stored.id}, {"state", to_json_value(stored.state)}});
    }));

    server_.Get("/api/training/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = find_session(id_param(req), res);
      if (!s) return;
      send_json(res, 200, {{"id", s->id}, {"created_at", s->created_at}, {"state", to_json_value(s->state)}});
    }));

    server_.Post("/api/training/sessions/:id/events",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   const auto id = id_param(req);
                   if (!Store::valid_id(id)) return send_error(res, 404, "NotFound", "unknown session '" + id + "'");
                   const auto body = json::parse(req.body);
                   const auto event = session_event_from_json(body.contains("event") ? body["event"] : body);
                   const auto lock = store_.session_lock(id);
                   std::lock_guard guard(*lock);
                   auto s = find_session(id, res);
                   if (!s) return;
                   s->state = advance(std::move(s->state), event);
                   store_.save_session(*s);
                   send_json(res, 200, {{"id", s->id}, {"state", to_json_value(s->state)}});
                 }));

    server_.Get("/api/training/sessions/:id/stimulus",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto s = find_session(id_param(req), res);
                  if (!s) return;
                  const auto* stim = s->state.current();
                  if (!stim) return send_error(res, 409, "NoCurrentStimulus", "the session has no current stimulus");
                  if (req.get_param_value("format") == "svg") {
                    if (stim->modality == Modality::AudioOnly)
                      return send_error(res, 409, "AudioOnlyStimulus", "this stimulus is presented as audio only");
                    return res.set_content(render_plot(stim->series), "image/svg+xml");
                  }
                  res.set_content(wav_string(stim->audio()), "audio/wav");
                }));

    server_.Get("/api/training/sessions/:id/report",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto s = find_session(id_param(req), res);
                  if (!s) return;
                  send_json(res, 200, to_json_value(score_session(s->state)));
                }));
  }

  Store store_;
  httplib::Server server_;
};

}  // namespace sonowork
