#pragma once

#include "emobase/eval/pipeline.hpp"
#include "emobase/features/features.hpp"
#include "emobase/learn/classifier.hpp"
#include "emobase/protocol/profile.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace emobase::service {

std::string sha256_hex(std::string_view data);

// Ids become path components: 1-64 of [A-Za-z0-9_.-], not starting with '.'.
bool valid_id(std::string_view id);
void require_id(std::string_view id, const char* what);  // ValidationError

enum class RunStatus : std::uint8_t { Pending, Done, Failed };
std::string_view run_status_name(RunStatus s);

struct RunParams {
  std::size_t w = 32;
  std::vector<std::string> mask;  // feature names
  std::optional<int> min_rank;
  std::string classifier = "rf";
  std::uint64_t seed = 1;
  bool binary = false;
};

struct RunDescriptor {
  std::string run_id;
  std::string subject_id;
  std::string dataset_id;
  std::string dataset_hash;
  RunParams params;
  RunStatus status = RunStatus::Pending;
  std::string error;
};

nlohmann::json run_to_json(const RunDescriptor& r);
RunDescriptor run_from_json(const nlohmann::json& j);
// Same descriptor and input hash give the same id.
std::string run_id_for(const std::string& subject_id, const std::string& dataset_hash, const RunParams& params);

struct DatasetInfo {
  std::string dataset_id;  // prefix of the CSV hash
  std::string sha256;
  std::size_t w = 32;
  std::vector<std::string> mask;
  std::optional<int> min_rank;
  std::size_t instances = 0;
  std::map<std::string, std::size_t> counts;  // per emotion name
};

nlohmann::json dataset_info_to_json(const DatasetInfo& d);
DatasetInfo dataset_info_from_json(const nlohmann::json& j);

struct StoredResponse {
  int status = 200;
  std::string body;
  std::string request_hash;
};

// File-backed state. Layout under the root:
//   pool.json
//   subjects/<id>/profile.json
//   subjects/<id>/recordings/sessions/<session>/{manifest.json,<device>.csv}
//   subjects/<id>/datasets/<dataset>.{csv,json}
//   runs/<run>/{run.json,model.json,report.json}
//   idempotency/<hash>.json
// Every file is written to a temporary name and renamed into place; a
// recording session directory is renamed into place as a whole.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  static void write_atomic(const std::filesystem::path& path, std::string_view data);
  static std::string read_file(const std::filesystem::path& path);

  void save_pool(const protocol::Pool& pool);
  protocol::Pool load_pool() const;  // empty pool when none was uploaded

  bool has_subject(const std::string& id) const;
  std::vector<std::string> subjects() const;
  void save_profile(const protocol::SubjectProfile& profile);
  protocol::SubjectProfile load_profile(const std::string& id, const protocol::ProtocolConfig& config) const;

  // Returns false when the same session was already stored with identical
  // content; ConflictError when it differs.
  bool save_recording(const std::string& subject, const eval::SessionRecording& rec);
  // Rankings come from the subject's profile (latest score per clip).
  eval::SubjectRecordings load_recordings(const std::string& subject,
                                          const protocol::SubjectProfile& profile) const;

  DatasetInfo save_dataset(const std::string& subject, const features::Dataset& ds, std::size_t w,
                           std::optional<int> min_rank);
  DatasetInfo dataset_info(const std::string& subject, const std::string& dataset_id) const;
  // Verifies the content hash; StoreError on mismatch.
  features::Dataset load_dataset(const std::string& subject, const std::string& dataset_id) const;

  bool has_run(const std::string& run_id) const;
  void save_run(const RunDescriptor& run);
  RunDescriptor load_run(const std::string& run_id) const;
  void save_run_outputs(const std::string& run_id, const learn::Model& model, const nlohmann::json& report);
  learn::Model load_model(const std::string& run_id) const;
  nlohmann::json load_report(const std::string& run_id) const;

  std::optional<StoredResponse> recall(const std::string& key) const;
  void remember(const std::string& key, const StoredResponse& response);

  // Writers of one subject take it exclusively, readers shared.
  std::shared_mutex& subject_lock(const std::string& id);

 private:
  std::filesystem::path subject_dir(const std::string& id) const;
  std::filesystem::path run_dir(const std::string& id) const;

  std::filesystem::path root_;
  std::mutex locks_guard_;
  std::map<std::string, std::unique_ptr<std::shared_mutex>> locks_;
};

}  // namespace emobase::service
