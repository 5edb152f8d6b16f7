#include "doctest.h"

#include "emobase/eval/pipeline.hpp"
#include "emobase/eval/synthetic.hpp"
#include "emobase/protocol/planner.hpp"
#include "emobase/protocol/protocol_io.hpp"
#include "emobase/protocol/simulation.hpp"
#include "emobase/service/api.hpp"
#include "emobase/signal/recording_io.hpp"

#include "httplib.h"

#include <chrono>
#include <fstream>
#include <random>
#include <thread>

using namespace emobase;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_root() {
  std::random_device rd;
  auto dir = fs::temp_directory_path() / ("emobase-svc-" + std::to_string(rd()));
  fs::remove_all(dir);
  return dir;
}

struct Live {
  fs::path root = fresh_root();
  std::unique_ptr<service::Service> svc;
  std::unique_ptr<httplib::Client> http;

  Live() { open(); }
  ~Live() {
    http.reset();
    svc.reset();
    fs::remove_all(root);
  }
  void open() {
    service::ServiceConfig cfg;
    cfg.port = 0;
    cfg.root = root;
    cfg.cors_origin = "http://localhost:5173";
    svc = std::make_unique<service::Service>(cfg);
    const int port = svc->start();
    http = std::make_unique<httplib::Client>("127.0.0.1", port);
    http->set_read_timeout(120, 0);
  }
  void restart() {
    http.reset();
    svc.reset();
    open();
  }

  std::pair<int, json> get(const std::string& path) {
    auto r = http->Get(path);
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
  std::pair<int, json> post(const std::string& path, const json& body, const std::string& key = {}) {
    httplib::Headers h;
    if (!key.empty()) h.emplace("Idempotency-Key", key);
    auto r = http->Post(path, h, body.dump(), "application/json");
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
};

json neutral_questionnaire() {
  json a = json::object();
  for (auto e : kTargetEmotions) a[std::string(emotion_name(e))] = json::object();
  return {{"affinity", a}};
}

json rankings_for(const json& plan, int score) {
  json out = json::array();
  for (const auto& item : plan["items"]) {
    if (item["type"] == "clip") out.push_back({{"clip_id", item["clip_id"]}, {"score", score}});
  }
  return out;
}

}  // namespace

TEST_CASE("service: subjects, plans and rankings") {
  Live live;
  const auto pool = protocol::simulation_pool({}, 11);
  CHECK(live.get("/health").first == 200);
  CHECK(live.post("/pool", protocol::pool_to_json(pool)).first == 200);

  auto [st, created] = live.post("/subjects", {{"subject_id", "alice"}, {"questionnaire", neutral_questionnaire()}});
  REQUIRE(st == 201);
  CHECK(created["subject_id"] == "alice");
  auto dup = live.post("/subjects", {{"subject_id", "alice"}, {"questionnaire", neutral_questionnaire()}});
  CHECK(dup.first == 409);
  CHECK(dup.second["code"] == "ConflictError");
  auto noq = live.post("/subjects", json::object());
  CHECK(noq.first == 422);
  CHECK(noq.second["code"] == "QuestionnaireError");
  auto r = live.http->Post("/subjects", "{not json", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);

  auto [s1, plan] = live.get("/subjects/alice/sessions/next");
  REQUIRE(s1 == 200);
  const auto parsed = protocol::plan_from_json(plan);
  auto history = live.svc->store().load_profile("alice", {});
  history.sessions.pop_back();
  CHECK(protocol::validate_plan(parsed, pool, history).empty());
  CHECK(live.get("/subjects/alice/sessions/next").second == plan);  // still pending

  const std::string sid = plan["session_id"];
  const std::string rank_path = "/subjects/alice/sessions/" + sid + "/rankings";
  const std::string first_clip = rankings_for(plan, 5)[0]["clip_id"];
  auto zero = live.post(rank_path, {{"clip_id", first_clip}, {"score", 0}});
  CHECK(zero.first == 422);
  CHECK(zero.second["code"] == "ValidationError");
  CHECK(zero.second.contains("message"));
  auto zero_flat = live.post("/rankings", {{"subject_id", "alice"}, {"session_id", sid}, {"clip_id", first_clip},
                                           {"score", 0}});
  CHECK(zero_flat.first == 422);

  const auto batch = rankings_for(plan, 8);
  auto a = live.post(rank_path, {{"rankings", batch}}, "key-1");
  REQUIRE(a.first == 200);
  auto b = live.post(rank_path, {{"rankings", batch}}, "key-1");
  CHECK(b == a);
  CHECK(live.svc->store().load_profile("alice", {}).rankings.size() == batch.size());
  CHECK(live.post(rank_path, {{"rankings", rankings_for(plan, 2)}}, "key-1").first == 409);

  auto [s2, next] = live.get("/subjects/alice/sessions/next");
  REQUIRE(s2 == 200);
  CHECK(next["session_id"] != sid);
  history = live.svc->store().load_profile("alice", {});
  history.sessions.pop_back();
  CHECK(protocol::validate_plan(protocol::plan_from_json(next), pool, history).empty());

  auto [sc, conv] = live.get("/subjects/alice/convergence");
  CHECK(sc == 200);
  CHECK(conv["status"] == "NeedMore");
  CHECK(conv["target_minutes"] == 50.0);

  CHECK(live.get("/subjects/nobody").first == 404);
  CHECK(live.get("/subjects/nobody").second["code"] == "NotFoundError");
  CHECK(live.get("/no/such/endpoint").first == 404);

  auto opt = live.http->Options("/subjects");
  REQUIRE(opt);
  CHECK(opt->status == 204);
  CHECK(opt->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");

  const auto before = live.get("/subjects/alice").second;
  live.restart();
  CHECK(live.get("/subjects/alice").second == before);
}

TEST_CASE("service: recordings, datasets, training and prediction") {
  Live live;
  REQUIRE(live.post("/subjects", {{"subject_id", "bob"}, {"questionnaire", neutral_questionnaire()}}).first == 201);

  auto spec = eval::default_synthetic_spec();
  spec.sessions = 2;
  const auto rec = eval::generate_synthetic_subject(spec, 4);
  const auto bundle = eval::recordings_to_json(rec);

  // first session as multipart, second as JSON
  const auto& s0 = bundle["sessions"][0];
  httplib::MultipartFormDataItems items{{"manifest", s0["manifest"].dump(), "manifest.json", "application/json"}};
  for (const auto& [device, csv] : s0["devices"].items()) {
    items.push_back({device, csv.get<std::string>(), device + ".csv", "text/csv"});
  }
  auto up = live.http->Post("/subjects/bob/recordings", items);
  REQUIRE(up);
  CHECK(up->status == 201);
  auto again = live.http->Post("/subjects/bob/recordings", items);
  REQUIRE(again);
  CHECK(again->status == 200);
  CHECK(live.post("/subjects/bob/recordings", bundle["sessions"][1]).first == 201);
  auto clash = bundle["sessions"][1];
  clash["devices"]["chest"] = s0["devices"]["chest"];
  CHECK(live.post("/subjects/bob/recordings", clash).first == 409);
  CHECK(live.post("/subjects/nobody/recordings", bundle["sessions"][1]).first == 404);

  auto [ds_status, ds] = live.post("/subjects/bob/datasets", {{"w", 32}});
  REQUIRE(ds_status == 201);
  CHECK(ds["instances"].get<int>() > 50);
  CHECK(ds["mask"].size() == 16);
  const std::string dataset_id = ds["dataset_id"];
  CHECK(live.post("/subjects/bob/datasets", {{"w", 100000}}).first == 422);

  auto [t1, run1] = live.post("/subjects/bob/train", {{"dataset_id", dataset_id}, {"classifier", "rf"}, {"seed", 3}});
  REQUIRE(t1 == 201);
  CHECK(run1["run"]["status"] == "done");
  CHECK(run1["report"]["mean_error"].get<double>() >= 0.0);
  auto [t2, run2] = live.post("/subjects/bob/train", {{"dataset_id", dataset_id}, {"classifier", "rf"}, {"seed", 3}});
  CHECK(t2 == 200);
  CHECK(run2["report"] == run1["report"]);
  CHECK(live.post("/subjects/bob/train", {{"dataset_id", dataset_id}, {"classifier", "knn"}}).first == 422);

  const std::string model = run1["run"]["run_id"];
  auto [is, imp] = live.get("/models/" + model + "/importance");
  REQUIRE(is == 200);
  CHECK(imp["importance"].size() == 16);

  auto [ps, pred] = live.post("/models/" + model + "/predict", {{"features", std::vector<double>(16, 0.1)}});
  CHECK(ps == 200);
  CHECK(pred["label"].get<int>() >= 1);
  json window = json::object();
  for (auto ch : kAllChannels) window[std::string(channel_name(ch))] = std::vector<double>(32, 0.2);
  CHECK(live.post("/models/" + model + "/predict", {{"window", window}}).first == 200);
  auto wrong = live.post("/models/" + model + "/predict", {{"features", std::vector<double>(5, 0.1)}});
  CHECK(wrong.first == 422);
  CHECK(wrong.second["code"] == "PredictError");

  auto [as, async_run] =
      live.post("/subjects/bob/train", {{"dataset_id", dataset_id}, {"classifier", "tree"}, {"async", true}});
  REQUIRE(as == 202);
  const std::string async_id = async_run["run"]["run_id"];
  json polled;
  for (int i = 0; i < 200; ++i) {
    polled = live.get("/runs/" + async_id).second;
    if (polled["run"]["status"] != "pending") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  CHECK(polled["run"]["status"] == "done");
  CHECK(live.get("/models/" + async_id + "/importance").first == 422);

  // a tampered dataset fails its hash check
  {
    std::ofstream out(live.root / "subjects" / "bob" / "datasets" / (dataset_id + ".csv"), std::ios::app);
    out << "\n";
  }
  auto tampered = live.post("/subjects/bob/train", {{"dataset_id", dataset_id}, {"seed", 99}});
  CHECK(tampered.first == 500);
  CHECK(tampered.second["code"] == "StoreError");
}

TEST_CASE("store writes are atomic and hashed") {
  const auto root = fresh_root();
  {
    service::Store store(root);
    service::Store::write_atomic(root / "x" / "a.txt", "hello");
    CHECK(service::Store::read_file(root / "x" / "a.txt") == "hello");
    for (const auto& e : fs::directory_iterator(root / "x")) CHECK(e.path().filename() == "a.txt");
    CHECK(service::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_FALSE(service::valid_id("../etc"));
    CHECK_FALSE(service::valid_id(""));
    CHECK(service::valid_id("s-01_a.b"));
    service::RunParams p;
    CHECK(service::run_id_for("a", "h", p) == service::run_id_for("a", "h", p));
    p.seed = 2;
    CHECK(service::run_id_for("a", "h", p) != service::run_id_for("a", "h", {}));
  }
  fs::remove_all(root);
}

TEST_CASE("service refuses a busy port") {
  Live live;
  service::ServiceConfig cfg;
  cfg.root = live.root;
  cfg.port = live.svc->port();
  service::Service second(cfg);
  CHECK_THROWS_AS(second.bind(), ConfigError);
}
