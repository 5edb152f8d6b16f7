#pragma once

#include "emobase/features/features.hpp"
#include "emobase/signal/signal.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace emobase::eval {

// Raw input of one session: its schedule plus every device stream.
struct SessionRecording {
  signal::SessionSchedule schedule;
  std::vector<signal::TimeSeries> streams;
};

struct SubjectRecordings {
  std::vector<SessionRecording> sessions;
  features::RankingLookup rankings;
};

// On-disk layout:
//   <dir>/rankings.json                 {"clip_id": score, ...}
//   <dir>/sessions/<id>/manifest.json
//   <dir>/sessions/<id>/<device>.csv    one file per device
SubjectRecordings load_recordings(const std::filesystem::path& dir);
void save_recordings(const SubjectRecordings& recordings, const std::filesystem::path& dir);

// Single-document form used for piping between CLI stages; CSV text is
// embedded per device.
nlohmann::json recordings_to_json(const SubjectRecordings& recordings);
SubjectRecordings recordings_from_json(const nlohmann::json& j);

struct SubjectSignals {
  std::vector<signal::LabeledSignalSet> sessions;
  features::RankingLookup rankings;
  std::vector<std::string> warnings;  // degenerate channels, per session
};

SubjectSignals preprocess_subject(const SubjectRecordings& recordings,
                                  const signal::PreprocessOptions& options = {});

nlohmann::json signals_to_json(const SubjectSignals& signals);
SubjectSignals signals_from_json(const nlohmann::json& j);

// cut -> extract -> build over every session.
features::Dataset dataset_from_signals(std::span<const signal::LabeledSignalSet> sessions,
                                       const features::WindowConfig& window,
                                       const features::DatasetOptions& options,
                                       const features::RankingLookup& rankings);

nlohmann::json rankings_to_json(const features::RankingLookup& rankings);
features::RankingLookup rankings_from_json(const nlohmann::json& j);

}  // namespace emobase::eval
