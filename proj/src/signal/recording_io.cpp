#include "emobase/signal/recording_io.hpp"

#include "emobase/errors.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>

namespace emobase::signal {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::int64_t parse_int64(std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("not an integer timestamp: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<TimeSeries> read_recording_csv(std::istream& in, const std::string& device) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("recording '" + device + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_ms,channel,value") {
    throw FormatError("recording '" + device + "': unexpected header '" + line + "'");
  }

  std::map<Channel, TimeSeries> by_channel;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw FormatError("recording '" + device + "' line " + std::to_string(line_no) +
                        ": expected 3 fields");
    }
    const Channel ch = parse_channel(fields[1]);
    auto [it, inserted] = by_channel.try_emplace(ch);
    if (inserted) {
      it->second.channel = ch;
      it->second.device = device;
    }
    it->second.samples.push_back(Sample{parse_int64(fields[0]), parse_double(fields[2])});
  }

  std::vector<TimeSeries> out;
  for (auto& [ch, series] : by_channel) {
    validate(series);
    out.push_back(std::move(series));
  }
  if (out.empty()) throw IngestError("recording '" + device + "' has no samples");
  return out;
}

void write_recording_csv(std::ostream& out, std::span<const TimeSeries> streams) {
  out << "timestamp_ms,channel,value\n";
  for (const auto& s : streams) {
    const auto name = channel_name(s.channel);
    for (const auto& sample : s.samples) {
      out << sample.t_ms << ',' << name << ',' << format_double(sample.value) << '\n';
    }
  }
}

SessionSchedule manifest_from_json(const json& j) {
  try {
    SessionSchedule s;
    s.session_id = j.at("session_id").get<std::string>();
    s.epoch_ms = j.value("epoch", std::int64_t{0});
    for (const auto& seg : j.at("segments")) {
      Segment out;
      out.start_s = seg.at("start_s").get<double>();
      out.end_s = seg.at("end_s").get<double>();
      const int code = seg.at("label").get<int>();
      auto label = emotion_from_code(code);
      if (!label) throw FormatError("label code " + std::to_string(code) + " outside 0-6");
      out.label = *label;
      if (seg.contains("clip_id") && !seg["clip_id"].is_null()) {
        out.clip_id = seg["clip_id"].get<std::string>();
      }
      s.segments.push_back(std::move(out));
    }
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed session manifest: ") + e.what());
  }
}

json manifest_to_json(const SessionSchedule& schedule) {
  json segs = json::array();
  for (const auto& s : schedule.segments) {
    segs.push_back({{"start_s", s.start_s},
                    {"end_s", s.end_s},
                    {"label", code_of(s.label)},
                    {"clip_id", s.clip_id ? json(*s.clip_id) : json(nullptr)}});
  }
  return {{"schema_version", 1},
          {"session_id", schedule.session_id},
          {"epoch", schedule.epoch_ms},
          {"segments", std::move(segs)}};
}

json labeled_to_json(const LabeledSignalSet& set) {
  json channels = json::object();
  for (auto c : kAllChannels) {
    if (set.has(c)) channels[std::string(channel_name(c))] = set.channel(c);
  }
  std::vector<int> labels;
  labels.reserve(set.labels.size());
  for (auto l : set.labels) labels.push_back(code_of(l));
  SessionSchedule schedule{set.session_id, 0, set.segments};
  return {{"session_id", set.session_id},
          {"sample_period_s", set.sample_period_s},
          {"t_ms", set.t_ms},
          {"channels", std::move(channels)},
          {"labels", std::move(labels)},
          {"excluded", set.excluded},
          {"segment_index", set.segment_index},
          {"segments", manifest_to_json(schedule)["segments"]}};
}

LabeledSignalSet labeled_from_json(const json& j) {
  try {
    LabeledSignalSet s;
    s.session_id = j.at("session_id").get<std::string>();
    s.sample_period_s = j.value("sample_period_s", 1.0);
    s.t_ms = j.at("t_ms").get<std::vector<std::int64_t>>();
    for (const auto& [name, values] : j.at("channels").items()) {
      s.channels[index_of(parse_channel(name))] = values.get<std::vector<double>>();
    }
    for (int code : j.at("labels").get<std::vector<int>>()) {
      auto e = emotion_from_code(code);
      if (!e) throw FormatError("label code out of range");
      s.labels.push_back(*e);
    }
    s.excluded = j.at("excluded").get<std::vector<std::uint8_t>>();
    s.segment_index = j.at("segment_index").get<std::vector<int>>();
    json manifest = {{"session_id", s.session_id}, {"segments", j.at("segments")}};
    s.segments = manifest_from_json(manifest).segments;
    const std::size_t n = s.t_ms.size();
    bool ok = s.labels.size() == n && s.excluded.size() == n && s.segment_index.size() == n;
    for (const auto& ch : s.channels) ok = ok && (ch.empty() || ch.size() == n);
    if (!ok) throw FormatError("labeled signal arrays differ in length");
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed labeled signal set: ") + e.what());
  }
}

}  // namespace emobase::signal
