#include "emobase/service/api.hpp"

#include "emobase/errors.hpp"
#include "emobase/eval/binary.hpp"
#include "emobase/eval/experiments.hpp"
#include "emobase/eval/pipeline.hpp"
#include "emobase/learn/forest.hpp"
#include "emobase/protocol/planner.hpp"
#include "emobase/protocol/protocol_io.hpp"
#include "emobase/signal/recording_io.hpp"

#include "httplib.h"

#include <cstdlib>
#include <sstream>
#include <thread>

namespace emobase::service {

using nlohmann::json;

ServiceConfig config_from_env(ServiceConfig base) {
  if (const char* v = std::getenv("EMOBASE_HOST")) base.host = v;
  if (const char* v = std::getenv("EMOBASE_PORT")) {
    try {
      base.port = std::stoi(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("EMOBASE_PORT is not a number: ") + v);
    }
  }
  if (const char* v = std::getenv("EMOBASE_STORE")) base.root = v;
  if (const char* v = std::getenv("EMOBASE_CORS_ORIGIN")) base.cors_origin = v;
  return base;
}

int status_for(std::string_view code) {
  if (code == "NotFoundError") return 404;
  if (code == "ConflictError" || code == "PoolExhaustedError") return 409;
  if (code == "StoreError") return 500;
  return 422;
}

TrainOutput execute_run(const features::Dataset& dataset, const RunParams& params) {
  eval::EvalSetup setup;
  setup.classifier.kind = learn::parse_classifier(params.classifier);
  setup.method = setup.classifier.kind == learn::ClassifierKind::RandomForest ? eval::Method::OutOfBag
                                                                              : eval::Method::CrossValidation;
  setup.binary = params.binary;
  setup.window = params.w;
  setup.min_rank = params.min_rank;
  auto report = eval::evaluate(dataset, setup, params.seed);
  auto model = learn::train(setup.classifier, eval::to_samples(dataset, params.binary), params.seed);
  return {std::move(model), std::move(report)};
}

namespace {

// Unparseable request bodies answer 400; well-formed but invalid ones 422.
class MalformedBody : public FormatError {
 public:
  using FormatError::FormatError;
};

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw MalformedBody(std::string("request body is not JSON: ") + e.what());
  }
}

// Documents posted by hand may omit the version; anything else is rejected
// by the readers.
json versioned(json j) {
  if (j.is_object() && !j.contains("schema_version")) j["schema_version"] = protocol::kProtocolSchemaVersion;
  return j;
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                json extra = json::object()) {
  extra["code"] = code;
  extra["message"] = message;
  send(res, status, extra);
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes"; }

json minutes_json(const std::map<Emotion, double>& m) {
  json j = json::object();
  for (const auto& [e, v] : m) j[std::string(emotion_name(e))] = v;
  return j;
}

std::string request_fingerprint(const httplib::Request& req) {
  std::string data = req.body;
  for (const auto& [name, file] : req.files) data += "\n--" + name + "\n" + file.content;
  return sha256_hex(data);
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  Store store;
  httplib::Server server;
  std::thread listener;
  int bound_port = 0;
  std::mutex idempotency_mutex;
  std::mutex workers_mutex;
  std::vector<std::thread> workers;

  explicit Impl(ServiceConfig c) : config(std::move(c)), store(config.root) {
    config.protocol.validate();
    // httplib's default adds SO_REUSEPORT, which would let a second service
    // share a busy port instead of failing.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    routes();
  }

  ~Impl() {
    server.stop();
    if (listener.joinable()) listener.join();
    std::lock_guard guard(workers_mutex);
    for (auto& w : workers) {
      if (w.joinable()) w.join();
    }
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler guarded(Handler fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const protocol::PoolExhaustedError& e) {
        send_error(res, 409, e.code(), e.what(), {{"emotion", emotion_name(e.emotion())}});
      } catch (const MalformedBody& e) {
        send_error(res, 400, e.code(), e.what());
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), e.code(), e.what());
      } catch (const json::parse_error& e) {
        send_error(res, 400, "FormatError", e.what());
      } catch (const json::exception& e) {
        send_error(res, 422, "FormatError", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
      }
    };
  }

  // Replays the stored response for a repeated Idempotency-Key.
  Handler mutating(Handler fn) {
    auto inner = guarded(std::move(fn));
    return [this, inner](const httplib::Request& req, httplib::Response& res) {
      const auto key = req.get_header_value("Idempotency-Key");
      if (key.empty()) return inner(req, res);
      std::lock_guard guard(idempotency_mutex);
      const std::string slot = req.method + " " + req.path + " " + key;
      const std::string fingerprint = request_fingerprint(req);
      try {
        if (auto prior = store.recall(slot)) {
          if (prior->request_hash != fingerprint) {
            send_error(res, 409, "ConflictError", "idempotency key reused with a different request");
            return;
          }
          res.status = prior->status;
          res.set_content(prior->body, "application/json");
          res.set_header("Idempotent-Replay", "true");
          return;
        }
        inner(req, res);
        if (res.status < 500) store.remember(slot, {res.status, res.body, fingerprint});
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), e.code(), e.what());
      }
    };
  }

  protocol::SubjectProfile profile(const std::string& id) { return store.load_profile(id, config.protocol); }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", config.cors_origin);
      res.set_header("Access-Control-Allow-Headers", "Content-Type, Idempotency-Key");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      if (req.method == "OPTIONS") {
        res.status = 204;
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "NotFoundError", "no such endpoint");
    });

    server.Get("/health", guarded([](const auto&, auto& res) { send(res, 200, {{"status", "ok"}}); }));

    server.Get("/pool", guarded([this](const auto&, auto& res) {
      send(res, 200, protocol::pool_to_json(store.load_pool()));
    }));
    server.Post("/pool", mutating([this](const auto& req, auto& res) {
      auto body = parse_body(req);
      if (body.is_object() && body.contains("clips")) body = body["clips"];
      const auto pool = protocol::pool_from_json(body);
      store.save_pool(pool);
      send(res, 200, {{"clips", pool.size()}});
    }));

    server.Get("/subjects", guarded([this](const auto&, auto& res) { send(res, 200, store.subjects()); }));
    server.Post("/subjects", mutating([this](const auto& req, auto& res) { create_subject(req, res); }));
    server.Get(R"(/subjects/([^/]+))", guarded([this](const auto& req, auto& res) {
      const auto id = req.matches[1].str();
      std::shared_lock lock(store.subject_lock(id));
      send(res, 200, protocol::profile_to_json(profile(id)));
    }));

    server.Get(R"(/subjects/([^/]+)/sessions/next)",
               guarded([this](const auto& req, auto& res) { next_session(req, res); }));
    server.Get(R"(/subjects/([^/]+)/sessions)", guarded([this](const auto& req, auto& res) {
      const auto id = req.matches[1].str();
      std::shared_lock lock(store.subject_lock(id));
      json out = json::array();
      for (const auto& s : profile(id).sessions) out.push_back(protocol::plan_to_json(s));
      send(res, 200, out);
    }));
    server.Get(R"(/subjects/([^/]+)/sessions/([^/]+))", guarded([this](const auto& req, auto& res) {
      const auto id = req.matches[1].str();
      std::shared_lock lock(store.subject_lock(id));
      const auto p = profile(id);
      const auto* plan = p.find_session(req.matches[2].str());
      if (!plan) throw NotFoundError("unknown session '" + req.matches[2].str() + "'");
      send(res, 200, protocol::plan_to_json(*plan));
    }));
    server.Post(R"(/subjects/([^/]+)/sessions/([^/]+)/rankings)", mutating([this](const auto& req, auto& res) {
      post_rankings(req.matches[1].str(), req.matches[2].str(), req, res);
    }));
    server.Post(R"(/subjects/([^/]+)/rankings)", mutating([this](const auto& req, auto& res) {
      post_rankings(req.matches[1].str(), {}, req, res);
    }));
    server.Post(R"(/rankings)", mutating([this](const auto& req, auto& res) {
      const auto body = parse_body(req);
      if (!body.is_object() || !body.contains("subject_id")) throw ValidationError("subject_id is required");
      post_rankings(body["subject_id"].template get<std::string>(), {}, req, res);
    }));

    server.Get(R"(/subjects/([^/]+)/convergence)", guarded([this](const auto& req, auto& res) {
      const auto id = req.matches[1].str();
      std::shared_lock lock(store.subject_lock(id));
      const auto p = profile(id);
      auto j = protocol::convergence_to_json(p.convergence);
      j["minutes"] = minutes_json(protocol::good_minutes(p, config.protocol));
      j["target_minutes"] = config.protocol.target_minutes;
      j["sessions_done"] = p.sessions.size();
      j["max_sessions"] = config.protocol.max_sessions;
      send(res, 200, j);
    }));

    server.Post(R"(/subjects/([^/]+)/recordings)",
                mutating([this](const auto& req, auto& res) { post_recording(req, res); }));
    server.Post(R"(/subjects/([^/]+)/datasets)",
                mutating([this](const auto& req, auto& res) { post_dataset(req, res); }));
    server.Get(R"(/subjects/([^/]+)/datasets/([^/]+))", guarded([this](const auto& req, auto& res) {
      send(res, 200, dataset_info_to_json(store.dataset_info(req.matches[1].str(), req.matches[2].str())));
    }));
    server.Post(R"(/subjects/([^/]+)/train)", mutating([this](const auto& req, auto& res) { post_train(req, res); }));

    server.Get(R"(/runs/([^/]+))", guarded([this](const auto& req, auto& res) {
      const auto run = store.load_run(req.matches[1].str());
      json j = {{"run", run_to_json(run)}};
      if (run.status == RunStatus::Done) j["report"] = store.load_report(run.run_id);
      send(res, 200, j);
    }));
    server.Get(R"(/models/([^/]+)/importance)", guarded([this](const auto& req, auto& res) {
      const auto run = store.load_run(req.matches[1].str());
      const auto model = store.load_model(run.run_id);
      const auto* forest = std::get_if<learn::ForestModel>(&model);
      if (!forest) throw ValidationError("importance is only defined for random forests");
      json rows = json::array();
      for (const auto& e : learn::variable_importance(*forest)) {
        rows.push_back({{"feature", e.feature}, {"score", e.score}});
      }
      send(res, 200, {{"model_id", run.run_id}, {"importance", rows}});
    }));
    server.Post(R"(/models/([^/]+)/predict)", guarded([this](const auto& req, auto& res) { predict(req, res); }));
  }

  void create_subject(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.is_object() || !body.contains("questionnaire")) {
      throw QuestionnaireError("questionnaire is required");
    }
    std::string id = body.value("subject_id", "");
    if (id.empty()) id = "subj-" + sha256_hex(body.dump() + std::to_string(store.subjects().size())).substr(0, 10);
    require_id(id, "subject id");
    std::unique_lock lock(store.subject_lock(id));
    if (store.has_subject(id)) throw ConflictError("subject '" + id + "' already exists");
    const auto q = protocol::questionnaire_from_json(versioned(body["questionnaire"]));
    const auto p = protocol::seed_profile(id, q, config.protocol);
    store.save_profile(p);
    send(res, 201, {{"subject_id", id}, {"convergence", protocol::convergence_to_json(p.convergence)}});
  }

  // A plan with no rankings yet is still pending and is handed out again;
  // otherwise a new one is generated and recorded.
  void next_session(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    const bool personalized = truthy(req.get_param_value("personalized"));
    std::unique_lock lock(store.subject_lock(id));
    auto p = profile(id);
    if (!p.sessions.empty()) {
      const auto& last = p.sessions.back();
      const bool ranked = std::any_of(p.rankings.begin(), p.rankings.end(), [&](const protocol::RankingRecord& r) {
        return r.ranking.session_id == last.session_id;
      });
      if (!ranked && last.personalized == personalized) {
        send(res, 200, protocol::plan_to_json(last));
        return;
      }
    }
    const auto pool = store.load_pool();
    if (pool.empty()) throw NotFoundError("no stimulus pool has been uploaded");
    std::size_t n = p.sessions.size() + 1;
    while (p.find_session("s" + std::to_string(n))) ++n;
    const auto plan = protocol::generate_session(p, pool, {"s" + std::to_string(n), personalized}, config.protocol);
    protocol::record_session(p, plan, config.protocol);
    store.save_profile(p);
    send(res, 200, protocol::plan_to_json(plan));
  }

  void post_rankings(const std::string& id, const std::string& session, const httplib::Request& req,
                     httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_object() && body.contains("rankings")) body = body["rankings"];
    if (!body.is_array()) body = json::array({body});
    if (body.empty()) throw ValidationError("no rankings given");
    std::unique_lock lock(store.subject_lock(id));
    auto p = profile(id);
    const auto pool = store.load_pool();
    for (auto item : body) {
      if (!item.is_object()) throw FormatError("each ranking must be an object");
      item.erase("subject_id");
      if (!session.empty()) {
        if (item.contains("session_id") && item["session_id"] != session) {
          throw ValidationError("ranking names session " + item["session_id"].dump() + " but was posted to '" +
                                session + "'");
        }
        item["session_id"] = session;
      }
      protocol::ingest_ranking(p, pool, protocol::ranking_from_json(versioned(item)), config.protocol);
    }
    store.save_profile(p);
    json excluded = json::array();
    for (const auto& [tag, e] : p.excluded) excluded.push_back({{"tag", tag}, {"emotion", emotion_name(e)}});
    send(res, 200,
         {{"ingested", body.size()},
          {"convergence", protocol::convergence_to_json(p.convergence)},
          {"excluded", excluded}});
  }

  void post_recording(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    eval::SessionRecording rec;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("manifest")) throw ValidationError("multipart upload needs a 'manifest' part");
      rec.schedule = signal::manifest_from_json(json::parse(req.get_file_value("manifest").content));
      for (const auto& [name, part] : req.files) {
        if (name == "manifest") continue;
        require_id(name, "device");
        std::istringstream in(part.content);
        auto streams = signal::read_recording_csv(in, name);
        rec.streams.insert(rec.streams.end(), streams.begin(), streams.end());
      }
    } else {
      const auto body = parse_body(req);
      rec.schedule = signal::manifest_from_json(body.at("manifest"));
      for (const auto& [name, csv] : body.at("devices").items()) {
        require_id(name, "device");
        std::istringstream in(csv.get<std::string>());
        auto streams = signal::read_recording_csv(in, name);
        rec.streams.insert(rec.streams.end(), streams.begin(), streams.end());
      }
    }
    if (rec.streams.empty()) throw IngestError("no device recordings in upload");
    // Reject uploads the preprocessing chain cannot take before storing them.
    (void)signal::preprocess_session(rec.streams, rec.schedule, config.preprocess);
    std::unique_lock lock(store.subject_lock(id));
    if (!store.has_subject(id)) throw NotFoundError("unknown subject '" + id + "'");
    const bool fresh = store.save_recording(id, rec);
    std::set<std::string> devices;
    for (const auto& s : rec.streams) devices.insert(s.device);
    send(res, fresh ? 201 : 200, {{"session_id", rec.schedule.session_id}, {"devices", devices}});
  }

  void post_dataset(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    const auto body = parse_body(req);
    features::WindowConfig window;
    window.w = body.value("w", std::size_t{32});
    window.validate();
    features::DatasetOptions opt;
    if (body.contains("min_rank") && !body["min_rank"].is_null()) opt.min_rank = body["min_rank"].get<int>();
    if (body.contains("mask")) {
      opt.mask.reset();
      for (const auto& name : body["mask"]) {
        opt.mask.set(static_cast<std::size_t>(features::parse_feature(name.get<std::string>())));
      }
    }
    auto pre = config.preprocess;
    pre.trim_s = body.value("trim_s", pre.trim_s);
    std::unique_lock lock(store.subject_lock(id));
    const auto p = profile(id);
    const auto recordings = store.load_recordings(id, p);
    const auto signals = eval::preprocess_subject(recordings, pre);
    const auto ds = eval::dataset_from_signals(signals.sessions, window, opt, signals.rankings);
    if (ds.size() == 0) throw DatasetError("no instances survive windowing and filtering");
    auto info = dataset_info_to_json(store.save_dataset(id, ds, window.w, opt.min_rank));
    info["warnings"] = signals.warnings;
    send(res, 201, info);
  }

  void run_now(RunDescriptor run, const features::Dataset& ds) {
    try {
      const auto out = execute_run(ds, run.params);
      store.save_run_outputs(run.run_id, out.model, eval::report_to_json(out.report, false));
      run.status = RunStatus::Done;
    } catch (const std::exception& e) {
      run.status = RunStatus::Failed;
      run.error = e.what();
    }
    store.save_run(run);
  }

  void post_train(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    const auto body = parse_body(req);
    if (!body.contains("dataset_id")) throw ValidationError("dataset_id is required");
    RunDescriptor run;
    run.subject_id = id;
    run.dataset_id = body["dataset_id"].get<std::string>();
    std::shared_lock lock(store.subject_lock(id));
    if (!store.has_subject(id)) throw NotFoundError("unknown subject '" + id + "'");
    const auto info = store.dataset_info(id, run.dataset_id);
    run.dataset_hash = info.sha256;
    run.params.w = info.w;
    run.params.mask = info.mask;
    run.params.min_rank = info.min_rank;
    run.params.classifier = body.value("classifier", "rf");
    (void)learn::parse_classifier(run.params.classifier);
    run.params.seed = body.value("seed", std::uint64_t{1});
    run.params.binary = body.value("binary", false);
    run.run_id = run_id_for(id, run.dataset_hash, run.params);

    if (store.has_run(run.run_id)) {
      const auto prior = store.load_run(run.run_id);
      if (prior.status != RunStatus::Failed) {
        json j = {{"run", run_to_json(prior)}};
        if (prior.status == RunStatus::Done) j["report"] = store.load_report(prior.run_id);
        send(res, 200, j);
        return;
      }
    }
    auto ds = store.load_dataset(id, run.dataset_id);  // hash-checked
    store.save_run(run);
    if (body.value("async", false)) {
      std::lock_guard guard(workers_mutex);
      workers.emplace_back([this, run, ds = std::move(ds)] { run_now(run, ds); });
      send(res, 202, {{"run", run_to_json(run)}});
      return;
    }
    run_now(run, ds);
    const auto done = store.load_run(run.run_id);
    if (done.status == RunStatus::Failed) {
      send_error(res, 422, "TrainError", done.error, {{"run", run_to_json(done)}});
      return;
    }
    send(res, 201, {{"run", run_to_json(done)}, {"report", store.load_report(done.run_id)}});
  }

  void predict(const httplib::Request& req, httplib::Response& res) {
    const auto run = store.load_run(req.matches[1].str());
    const auto model = store.load_model(run.run_id);
    const auto body = parse_body(req);
    features::FeatureMask mask;
    for (const auto& name : run.params.mask) mask.set(static_cast<std::size_t>(features::parse_feature(name)));

    std::vector<double> x;
    if (body.contains("features")) {
      const auto v = body["features"].get<std::vector<double>>();
      if (v.size() == features::kFeatureCount && mask.count() != features::kFeatureCount) {
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (mask.test(k)) x.push_back(v[k]);
        }
      } else {
        x = v;
      }
    } else if (body.contains("window")) {
      features::Window win;
      for (auto ch : kAllChannels) {
        const std::string name(channel_name(ch));
        if (!body["window"].contains(name)) throw ValidationError("window is missing channel " + name);
        win.channels[index_of(ch)] = body["window"][name].get<std::vector<double>>();
      }
      const auto f = features::extract_features(win);
      for (std::size_t k = 0; k < f.size(); ++k) {
        if (mask.test(k)) x.push_back(f[k]);
      }
    } else {
      throw ValidationError("give either 'features' or 'window'");
    }
    if (x.size() != learn::input_dimension(model)) {
      throw PredictError("expected " + std::to_string(learn::input_dimension(model)) + " features, got " +
                         std::to_string(x.size()));
    }
    const int label = learn::predict(model, x);
    const std::string name = run.params.binary ? std::string(eval::binary_name(label))
                                               : std::string(emotion_name(*emotion_from_code(label)));
    send(res, 200, {{"label", label}, {"emotion", name}, {"model_id", run.run_id}});
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() = default;

int Service::bind() {
  auto& i = *impl_;
  if (i.config.port == 0) {
    i.bound_port = i.server.bind_to_any_port(i.config.host);
  } else if (i.server.bind_to_port(i.config.host, i.config.port)) {
    i.bound_port = i.config.port;
  } else {
    i.bound_port = -1;
  }
  if (i.bound_port <= 0) {
    throw ConfigError("cannot bind " + i.config.host + ":" + std::to_string(i.config.port) +
                      " (port busy or not permitted)");
  }
  return i.bound_port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int p = bind();
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return p;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

int Service::port() const { return impl_->bound_port; }

Store& Service::store() { return impl_->store; }

}  // namespace emobase::service
