#include "emobase/service/store.hpp"

#include "emobase/errors.hpp"
#include "emobase/features/dataset_io.hpp"
#include "emobase/learn/model_io.hpp"
#include "emobase/protocol/protocol_io.hpp"
#include "emobase/signal/recording_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace emobase::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw StoreError("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

void require_id(std::string_view id, const char* what) {
  if (!valid_id(id)) throw ValidationError(std::string(what) + " '" + std::string(id) + "' is not a valid id");
}

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Pending:
      return "pending";
    case RunStatus::Done:
      return "done";
    case RunStatus::Failed:
      return "failed";
  }
  return "?";
}

namespace {

RunStatus parse_status(const std::string& s) {
  if (s == "pending") return RunStatus::Pending;
  if (s == "done") return RunStatus::Done;
  if (s == "failed") return RunStatus::Failed;
  throw FormatError("unknown run status '" + s + "'");
}

json params_to_json(const RunParams& p) {
  return {{"w", p.w},
          {"mask", p.mask},
          {"min_rank", p.min_rank ? json(*p.min_rank) : json(nullptr)},
          {"classifier", p.classifier},
          {"seed", p.seed},
          {"binary", p.binary}};
}

json read_json(const fs::path& p) {
  try {
    return json::parse(Store::read_file(p));
  } catch (const json::parse_error& e) {
    throw StoreError("corrupt file " + p.string() + ": " + e.what());
  }
}

void fsync_path(const fs::path& p, int flags) {
  const int fd = ::open(p.c_str(), flags);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::string temp_suffix() {
  static std::atomic<unsigned long> counter{0};
  return ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
}

}  // namespace

json run_to_json(const RunDescriptor& r) {
  return {{"schema_version", 1},
          {"run_id", r.run_id},
          {"subject_id", r.subject_id},
          {"dataset_id", r.dataset_id},
          {"dataset_hash", r.dataset_hash},
          {"params", params_to_json(r.params)},
          {"status", run_status_name(r.status)},
          {"error", r.error}};
}

RunDescriptor run_from_json(const json& j) {
  try {
    RunDescriptor r;
    r.run_id = j.at("run_id").get<std::string>();
    r.subject_id = j.at("subject_id").get<std::string>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.dataset_hash = j.at("dataset_hash").get<std::string>();
    const auto& p = j.at("params");
    r.params.w = p.at("w").get<std::size_t>();
    r.params.mask = p.at("mask").get<std::vector<std::string>>();
    if (!p.at("min_rank").is_null()) r.params.min_rank = p["min_rank"].get<int>();
    r.params.classifier = p.at("classifier").get<std::string>();
    r.params.seed = p.at("seed").get<std::uint64_t>();
    r.params.binary = p.at("binary").get<bool>();
    r.status = parse_status(j.at("status").get<std::string>());
    r.error = j.value("error", "");
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("run descriptor: ") + e.what());
  }
}

std::string run_id_for(const std::string& subject_id, const std::string& dataset_hash, const RunParams& params) {
  const json key = {{"subject", subject_id}, {"dataset", dataset_hash}, {"params", params_to_json(params)}};
  return "run-" + sha256_hex(key.dump()).substr(0, 16);
}

json dataset_info_to_json(const DatasetInfo& d) {
  return {{"schema_version", 1},
          {"dataset_id", d.dataset_id},
          {"sha256", d.sha256},
          {"w", d.w},
          {"mask", d.mask},
          {"min_rank", d.min_rank ? json(*d.min_rank) : json(nullptr)},
          {"instances", d.instances},
          {"counts", d.counts}};
}

DatasetInfo dataset_info_from_json(const json& j) {
  try {
    DatasetInfo d;
    d.dataset_id = j.at("dataset_id").get<std::string>();
    d.sha256 = j.at("sha256").get<std::string>();
    d.w = j.at("w").get<std::size_t>();
    d.mask = j.at("mask").get<std::vector<std::string>>();
    if (!j.at("min_rank").is_null()) d.min_rank = j["min_rank"].get<int>();
    d.instances = j.at("instances").get<std::size_t>();
    d.counts = j.at("counts").get<std::map<std::string, std::size_t>>();
    return d;
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset info: ") + e.what());
  }
}

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const char* sub : {"subjects", "runs", "idempotency"}) {
    fs::create_directories(root_ / sub, ec);
    if (ec) throw StoreError("cannot create " + (root_ / sub).string() + ": " + ec.message());
  }
  const auto probe = root_ / ".probe";
  write_atomic(probe, "ok");
  fs::remove(probe, ec);
}

void Store::write_atomic(const fs::path& path, std::string_view data) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + temp_suffix();
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw StoreError("cannot write " + tmp.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fs::remove(tmp, ec);
      throw StoreError("write failed for " + tmp.string() + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StoreError("cannot rename into " + path.string());
  }
  fsync_path(path.parent_path(), O_RDONLY | O_DIRECTORY);
}

std::string Store::read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("missing " + path.filename().string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Store::save_pool(const protocol::Pool& pool) {
  protocol::validate_pool(pool);
  write_atomic(root_ / "pool.json", protocol::pool_to_json(pool).dump(2) + "\n");
}

protocol::Pool Store::load_pool() const {
  if (!fs::exists(root_ / "pool.json")) return {};
  return protocol::pool_from_json(read_json(root_ / "pool.json"));
}

fs::path Store::subject_dir(const std::string& id) const {
  require_id(id, "subject id");
  return root_ / "subjects" / id;
}

fs::path Store::run_dir(const std::string& id) const {
  require_id(id, "run id");
  return root_ / "runs" / id;
}

bool Store::has_subject(const std::string& id) const {
  return valid_id(id) && fs::exists(subject_dir(id) / "profile.json");
}

std::vector<std::string> Store::subjects() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_ / "subjects")) {
    if (fs::exists(e.path() / "profile.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Store::save_profile(const protocol::SubjectProfile& profile) {
  write_atomic(subject_dir(profile.subject_id) / "profile.json", protocol::profile_to_json(profile).dump(2) + "\n");
}

protocol::SubjectProfile Store::load_profile(const std::string& id, const protocol::ProtocolConfig& config) const {
  if (!has_subject(id)) throw NotFoundError("unknown subject '" + id + "'");
  return protocol::profile_from_json(read_json(subject_dir(id) / "profile.json"), config);
}

bool Store::save_recording(const std::string& subject, const eval::SessionRecording& rec) {
  const auto& sid = rec.schedule.session_id;
  require_id(sid, "session id");
  // Render through a scratch bundle so that file content is canonical.
  eval::SubjectRecordings one;
  one.sessions.push_back(rec);
  const json bundle = eval::recordings_to_json(one);
  const auto& session = bundle["sessions"][0];
  for (const auto& [device, _] : session["devices"].items()) require_id(device, "device");

  const auto base = subject_dir(subject) / "recordings";
  const auto final_dir = base / "sessions" / sid;
  if (fs::exists(final_dir)) {
    const auto existing = eval::recordings_to_json(load_recordings(subject, {}));
    for (const auto& s : existing["sessions"]) {
      if (s["manifest"]["session_id"] == sid) {
        if (s == session) return false;
        break;
      }
    }
    throw ConflictError("session '" + sid + "' already has different recordings");
  }
  const fs::path tmp = base / (".incoming-" + sid + temp_suffix());
  fs::create_directories(tmp);
  for (const auto& [device, csv] : session["devices"].items()) {
    write_atomic(tmp / (device + ".csv"), csv.get<std::string>());
  }
  write_atomic(tmp / "manifest.json", session["manifest"].dump(2) + "\n");
  fs::create_directories(base / "sessions");
  std::error_code ec;
  fs::rename(tmp, final_dir, ec);
  if (ec) {
    fs::remove_all(tmp, ec);
    throw StoreError("cannot commit recordings of session '" + sid + "'");
  }
  fsync_path(base / "sessions", O_RDONLY | O_DIRECTORY);
  return true;
}

eval::SubjectRecordings Store::load_recordings(const std::string& subject,
                                               const protocol::SubjectProfile& profile) const {
  const auto dir = subject_dir(subject) / "recordings";
  if (!fs::is_directory(dir / "sessions")) throw NotFoundError("subject '" + subject + "' has no recordings");
  auto rec = eval::load_recordings(dir);
  rec.rankings.clear();
  for (const auto& r : profile.rankings) rec.rankings[r.ranking.clip_id] = r.ranking.score;
  return rec;
}

DatasetInfo Store::save_dataset(const std::string& subject, const features::Dataset& ds, std::size_t w,
                                std::optional<int> min_rank) {
  std::ostringstream csv;
  features::write_dataset_csv(csv, ds);
  const std::string text = csv.str();
  DatasetInfo info;
  info.sha256 = sha256_hex(text);
  info.dataset_id = "ds-" + info.sha256.substr(0, 16);
  info.w = w;
  for (auto f : ds.active_features()) info.mask.emplace_back(features::feature_name(f));
  info.min_rank = min_rank;
  info.instances = ds.size();
  for (const auto& inst : ds.instances) ++info.counts[std::string(emotion_name(inst.label))];
  const auto dir = subject_dir(subject) / "datasets";
  write_atomic(dir / (info.dataset_id + ".csv"), text);
  write_atomic(dir / (info.dataset_id + ".json"), dataset_info_to_json(info).dump(2) + "\n");
  return info;
}

DatasetInfo Store::dataset_info(const std::string& subject, const std::string& dataset_id) const {
  require_id(dataset_id, "dataset id");
  const auto p = subject_dir(subject) / "datasets" / (dataset_id + ".json");
  if (!fs::exists(p)) throw NotFoundError("unknown dataset '" + dataset_id + "'");
  return dataset_info_from_json(read_json(p));
}

features::Dataset Store::load_dataset(const std::string& subject, const std::string& dataset_id) const {
  const auto info = dataset_info(subject, dataset_id);
  const std::string text = read_file(subject_dir(subject) / "datasets" / (dataset_id + ".csv"));
  if (sha256_hex(text) != info.sha256) throw StoreError("dataset '" + dataset_id + "' failed its hash check");
  std::istringstream in(text);
  auto ds = features::read_dataset_csv(in);
  ds.mask.reset();
  for (const auto& name : info.mask) ds.mask.set(static_cast<std::size_t>(features::parse_feature(name)));
  return ds;
}

bool Store::has_run(const std::string& run_id) const {
  return valid_id(run_id) && fs::exists(run_dir(run_id) / "run.json");
}

void Store::save_run(const RunDescriptor& run) {
  write_atomic(run_dir(run.run_id) / "run.json", run_to_json(run).dump(2) + "\n");
}

RunDescriptor Store::load_run(const std::string& run_id) const {
  if (!has_run(run_id)) throw NotFoundError("unknown run '" + run_id + "'");
  return run_from_json(read_json(run_dir(run_id) / "run.json"));
}

void Store::save_run_outputs(const std::string& run_id, const learn::Model& model, const json& report) {
  const auto dir = run_dir(run_id);
  const std::string report_text = report.dump(2) + "\n";
  write_atomic(dir / "report.json", report_text);
  write_atomic(dir / "model.json", learn::model_to_json(model).dump() + "\n");
}

learn::Model Store::load_model(const std::string& run_id) const {
  const auto p = run_dir(run_id) / "model.json";
  if (!fs::exists(p)) throw NotFoundError("no model for '" + run_id + "'");
  return learn::model_from_json(read_json(p));
}

json Store::load_report(const std::string& run_id) const {
  const auto p = run_dir(run_id) / "report.json";
  if (!fs::exists(p)) throw NotFoundError("no report for '" + run_id + "'");
  return read_json(p);
}

std::optional<StoredResponse> Store::recall(const std::string& key) const {
  const auto p = root_ / "idempotency" / (sha256_hex(key) + ".json");
  if (!fs::exists(p)) return std::nullopt;
  const auto j = read_json(p);
  return StoredResponse{j.at("status").get<int>(), j.at("body").get<std::string>(),
                        j.at("request_hash").get<std::string>()};
}

void Store::remember(const std::string& key, const StoredResponse& r) {
  const json j = {{"status", r.status}, {"body", r.body}, {"request_hash", r.request_hash}};
  write_atomic(root_ / "idempotency" / (sha256_hex(key) + ".json"), j.dump() + "\n");
}

std::shared_mutex& Store::subject_lock(const std::string& id) {
  std::lock_guard guard(locks_guard_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::shared_mutex>();
  return *slot;
}

}  // namespace emobase::service
