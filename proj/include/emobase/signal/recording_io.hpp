#pragma once

#include "emobase/signal/signal.hpp"

#include "json.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace emobase::signal {

// Device recording CSV: header `timestamp_ms,channel,value`, timestamps in
// integer milliseconds since the session epoch. Rows of different channels
// may interleave; each channel becomes one TimeSeries, ordered by Channel.
std::vector<TimeSeries> read_recording_csv(std::istream& in, const std::string& device);
void write_recording_csv(std::ostream& out, std::span<const TimeSeries> streams);

// Session manifest:
//   {"schema_version": 1, "session_id": "...", "epoch": <unix ms>,
//    "segments": [{"start_s": 0, "end_s": 300, "label": 0, "clip_id": null}, ...]}
SessionSchedule manifest_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const SessionSchedule& schedule);

nlohmann::json labeled_to_json(const LabeledSignalSet& set);
LabeledSignalSet labeled_from_json(const nlohmann::json& j);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace emobase::signal
