#include "emobase/eval/pipeline.hpp"

#include "emobase/errors.hpp"
#include "emobase/signal/recording_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace emobase::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot write " + path.string());
  out << text;
}

// Streams grouped by device name, in name order.
std::map<std::string, std::vector<signal::TimeSeries>> by_device(const SessionRecording& s) {
  std::map<std::string, std::vector<signal::TimeSeries>> out;
  for (const auto& ts : s.streams) out[ts.device.empty() ? "device" : ts.device].push_back(ts);
  return out;
}

std::string csv_text(std::span<const signal::TimeSeries> streams) {
  std::ostringstream out;
  signal::write_recording_csv(out, streams);
  return out.str();
}

}  // namespace

json rankings_to_json(const features::RankingLookup& rankings) {
  json j = json::object();
  for (const auto& [clip, score] : rankings) j[clip] = score;
  return j;
}

features::RankingLookup rankings_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("rankings must be an object of clip_id -> score");
  features::RankingLookup out;
  for (const auto& [clip, score] : j.items()) {
    if (!score.is_number_integer()) throw FormatError("ranking of '" + clip + "' is not an integer");
    out[clip] = score.get<int>();
  }
  return out;
}

SubjectRecordings load_recordings(const fs::path& dir) {
  SubjectRecordings out;
  const auto rankings = dir / "rankings.json";
  if (fs::exists(rankings)) out.rankings = rankings_from_json(read_json_file(rankings));
  const auto sessions_dir = dir / "sessions";
  if (!fs::is_directory(sessions_dir)) throw IngestError("no sessions directory in " + dir.string());

  std::vector<fs::path> session_dirs;
  for (const auto& entry : fs::directory_iterator(sessions_dir)) {
    if (entry.is_directory()) session_dirs.push_back(entry.path());
  }
  std::sort(session_dirs.begin(), session_dirs.end());
  for (const auto& sdir : session_dirs) {
    SessionRecording rec;
    rec.schedule = signal::manifest_from_json(read_json_file(sdir / "manifest.json"));
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(sdir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
    for (const auto& csv : csvs) {
      std::ifstream in(csv);
      if (!in) throw IngestError("cannot open " + csv.string());
      auto streams = signal::read_recording_csv(in, csv.stem().string());
      rec.streams.insert(rec.streams.end(), streams.begin(), streams.end());
    }
    if (rec.streams.empty()) throw IngestError("session " + sdir.string() + " has no recordings");
    out.sessions.push_back(std::move(rec));
  }
  if (out.sessions.empty()) throw IngestError("no sessions found in " + sessions_dir.string());
  return out;
}

void save_recordings(const SubjectRecordings& recordings, const fs::path& dir) {
  fs::create_directories(dir / "sessions");
  write_text_file(dir / "rankings.json", rankings_to_json(recordings.rankings).dump(2) + "\n");
  for (const auto& s : recordings.sessions) {
    const auto sdir = dir / "sessions" / s.schedule.session_id;
    fs::create_directories(sdir);
    write_text_file(sdir / "manifest.json", signal::manifest_to_json(s.schedule).dump(2) + "\n");
    for (const auto& [device, streams] : by_device(s)) {
      write_text_file(sdir / (device + ".csv"), csv_text(streams));
    }
  }
}

json recordings_to_json(const SubjectRecordings& recordings) {
  json sessions = json::array();
  for (const auto& s : recordings.sessions) {
    json devices = json::object();
    for (const auto& [device, streams] : by_device(s)) devices[device] = csv_text(streams);
    sessions.push_back({{"manifest", signal::manifest_to_json(s.schedule)}, {"devices", devices}});
  }
  return {{"schema_version", 1},
          {"kind", "recordings"},
          {"rankings", rankings_to_json(recordings.rankings)},
          {"sessions", sessions}};
}

SubjectRecordings recordings_from_json(const json& j) {
  if (!j.is_object() || j.value("kind", "") != "recordings") {
    throw FormatError("document is not a recordings bundle");
  }
  SubjectRecordings out;
  try {
    out.rankings = rankings_from_json(j.at("rankings"));
    for (const auto& s : j.at("sessions")) {
      SessionRecording rec;
      rec.schedule = signal::manifest_from_json(s.at("manifest"));
      for (const auto& [device, text] : s.at("devices").items()) {
        std::istringstream in(text.get<std::string>());
        auto streams = signal::read_recording_csv(in, device);
        rec.streams.insert(rec.streams.end(), streams.begin(), streams.end());
      }
      out.sessions.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed recordings bundle: ") + e.what());
  }
  return out;
}

SubjectSignals preprocess_subject(const SubjectRecordings& recordings,
                                  const signal::PreprocessOptions& options) {
  SubjectSignals out;
  out.rankings = recordings.rankings;
  for (const auto& s : recordings.sessions) {
    auto pre = signal::preprocess_session(s.streams, s.schedule, options);
    for (Channel c : pre.degenerate_channels) {
      out.warnings.push_back("session " + s.schedule.session_id + ": channel " +
                             std::string(channel_name(c)) + " is constant");
    }
    out.sessions.push_back(std::move(pre.signals));
  }
  return out;
}

json signals_to_json(const SubjectSignals& signals) {
  json sessions = json::array();
  for (const auto& s : signals.sessions) sessions.push_back(signal::labeled_to_json(s));
  return {{"schema_version", 1},
          {"kind", "signals"},
          {"rankings", rankings_to_json(signals.rankings)},
          {"warnings", signals.warnings},
          {"sessions", sessions}};
}

SubjectSignals signals_from_json(const json& j) {
  if (!j.is_object() || j.value("kind", "") != "signals") {
    throw FormatError("document is not a signals bundle");
  }
  SubjectSignals out;
  try {
    out.rankings = rankings_from_json(j.at("rankings"));
    if (j.contains("warnings")) out.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& s : j.at("sessions")) out.sessions.push_back(signal::labeled_from_json(s));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed signals bundle: ") + e.what());
  }
  return out;
}

features::Dataset dataset_from_signals(std::span<const signal::LabeledSignalSet> sessions,
                                       const features::WindowConfig& window,
                                       const features::DatasetOptions& options,
                                       const features::RankingLookup& rankings) {
  std::vector<features::Window> windows;
  for (const auto& s : sessions) {
    auto w = features::cut_windows(s, window);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return features::build_dataset(windows, options, rankings);
}

}  // namespace emobase::eval
