#include "emobase/protocol/protocol_io.hpp"

namespace emobase::protocol {

using nlohmann::json;

namespace {

void check_version(const json& j, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + " must be a JSON object");
  const auto v = j.value("schema_version", 0);
  if (v != kProtocolSchemaVersion) {
    throw FormatError(std::string(what) + ": unsupported schema_version " + std::to_string(v));
  }
}

Emotion emotion_of(const json& j) {
  if (j.is_number_integer()) {
    if (auto e = emotion_from_code(j.get<int>())) return *e;
    throw FormatError("bad emotion code " + j.dump());
  }
  if (!j.is_string()) throw FormatError("emotion must be a name or code");
  return parse_emotion(j.get<std::string>());
}

std::string emotion_str(Emotion e) { return std::string(emotion_name(e)); }

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json clip_to_json(const StimulusClip& c) {
  return {{"clip_id", c.clip_id},
          {"title", c.title},
          {"source_url", c.source_url},
          {"target_emotion", emotion_str(c.target)},
          {"tags", c.tags},
          {"duration_s", c.duration_s},
          {"is_compilation", c.is_compilation},
          {"is_personal", c.is_personal},
          {"recency_class", c.recency == RecencyClass::Classic ? "classic" : "contemporary"}};
}

StimulusClip clip_from_json(const json& j) {
  auto c = guarded("clip", [&] {
    StimulusClip c;
    c.clip_id = j.at("clip_id").get<std::string>();
    c.title = j.value("title", "");
    c.source_url = j.value("source_url", "");
    c.target = emotion_of(j.at("target_emotion"));
    c.tags = j.value("tags", std::set<std::string>{});
    c.duration_s = j.at("duration_s").get<double>();
    c.is_compilation = j.value("is_compilation", false);
    c.is_personal = j.value("is_personal", false);
    const auto rec = j.value("recency_class", std::string("contemporary"));
    if (rec == "classic") {
      c.recency = RecencyClass::Classic;
    } else if (rec != "contemporary") {
      throw FormatError("bad recency_class '" + rec + "'");
    }
    return c;
  });
  validate_clip(c);
  return c;
}

json pool_to_json(const Pool& pool) {
  json a = json::array();
  for (const auto& c : pool) a.push_back(clip_to_json(c));
  return a;
}

Pool pool_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("pool must be a JSON array of clips");
  Pool pool;
  for (const auto& c : j) pool.push_back(clip_from_json(c));
  validate_pool(pool);
  return pool;
}

json ranking_to_json(const Ranking& r) {
  json j = {{"schema_version", kProtocolSchemaVersion},
            {"clip_id", r.clip_id},
            {"session_id", r.session_id},
            {"score", r.score},
            {"evoked_emotion", nullptr},
            {"effective_span", nullptr},
            {"notes", r.notes}};
  if (r.evoked) j["evoked_emotion"] = emotion_str(*r.evoked);
  if (r.effective_span) j["effective_span"] = {r.effective_span->first, r.effective_span->second};
  return j;
}

Ranking ranking_from_json(const json& j) {
  check_version(j, "ranking");
  auto r = guarded("ranking", [&] {
    Ranking r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.session_id = j.at("session_id").get<std::string>();
    r.score = j.at("score").get<int>();
    if (j.contains("evoked_emotion") && !j["evoked_emotion"].is_null()) r.evoked = emotion_of(j["evoked_emotion"]);
    if (j.contains("effective_span") && !j["effective_span"].is_null()) {
      const auto& s = j["effective_span"];
      if (!s.is_array() || s.size() != 2) throw FormatError("effective_span must be [start_s, end_s]");
      r.effective_span = std::make_pair(s[0].get<double>(), s[1].get<double>());
    }
    r.notes = j.value("notes", "");
    return r;
  });
  validate_ranking(r);
  return r;
}

json plan_to_json(const SessionPlan& p) {
  json items = json::array();
  for (const auto& item : p.items) {
    if (const auto* r = std::get_if<RestBlock>(&item)) {
      items.push_back({{"type", "rest"}, {"duration_s", r->duration_s}});
    } else {
      const auto& c = std::get<ClipBlock>(item);
      items.push_back({{"type", "clip"},
                       {"clip_id", c.clip_id},
                       {"target_emotion", emotion_str(c.target)},
                       {"duration_s", c.duration_s}});
    }
  }
  json covered = json::array();
  for (auto e : p.emotions_covered) covered.push_back(emotion_str(e));
  return {{"schema_version", kProtocolSchemaVersion},
          {"session_id", p.session_id},
          {"personalized", p.personalized},
          {"items", items},
          {"planned_total_s", p.planned_total_s},
          {"emotions_covered", covered}};
}

SessionPlan plan_from_json(const json& j) {
  check_version(j, "plan");
  return guarded("plan", [&] {
    SessionPlan p;
    p.session_id = j.at("session_id").get<std::string>();
    p.personalized = j.value("personalized", false);
    for (const auto& it : j.at("items")) {
      const auto type = it.at("type").get<std::string>();
      if (type == "rest") {
        p.items.emplace_back(RestBlock{it.at("duration_s").get<double>()});
      } else if (type == "clip") {
        p.items.emplace_back(ClipBlock{it.at("clip_id").get<std::string>(), emotion_of(it.at("target_emotion")),
                                       it.value("duration_s", 0.0)});
      } else {
        throw FormatError("unknown plan item type '" + type + "'");
      }
    }
    p.planned_total_s = j.at("planned_total_s").get<double>();
    for (const auto& e : j.at("emotions_covered")) p.emotions_covered.push_back(emotion_of(e));
    return p;
  });
}

json questionnaire_to_json(const Questionnaire& q) {
  json a = json::object();
  for (const auto& [e, tags] : q.affinity) a[emotion_str(e)] = tags;
  return {{"schema_version", kProtocolSchemaVersion}, {"affinity", a}};
}

Questionnaire questionnaire_from_json(const json& j) {
  check_version(j, "questionnaire");
  return guarded("questionnaire", [&] {
    Questionnaire q;
    for (const auto& [name, tags] : j.at("affinity").items()) {
      q.affinity[parse_emotion(name)] = tags.get<std::map<std::string, int>>();
    }
    return q;
  });
}

ProtocolConfig config_from_json(const json& j) {
  ProtocolConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw FormatError("protocol config must be an object");
  guarded("protocol config", [&] {
    c.ema_weight = j.value("ema_weight", c.ema_weight);
    c.exclusion_strikes = j.value("exclusion_strikes", c.exclusion_strikes);
    c.rest_s = j.value("rest_s", c.rest_s);
    c.personalized_rest_s = j.value("personalized_rest_s", c.personalized_rest_s);
    c.min_total_s = j.value("min_total_s", c.min_total_s);
    c.max_total_s = j.value("max_total_s", c.max_total_s);
    c.min_clips = j.value("min_clips", c.min_clips);
    c.max_clips = j.value("max_clips", c.max_clips);
    c.clip_min_s = j.value("clip_min_s", c.clip_min_s);
    c.clip_max_s = j.value("clip_max_s", c.clip_max_s);
    c.compilation_min_s = j.value("compilation_min_s", c.compilation_min_s);
    c.compilation_max_s = j.value("compilation_max_s", c.compilation_max_s);
    c.personalized_minutes = j.value("personalized_minutes", c.personalized_minutes);
    c.good_rank = j.value("good_rank", c.good_rank);
    c.target_minutes = j.value("target_minutes", c.target_minutes);
    c.max_sessions = j.value("max_sessions", c.max_sessions);
    return 0;
  });
  c.validate();
  return c;
}

json config_to_json(const ProtocolConfig& c) {
  return {{"ema_weight", c.ema_weight},
          {"exclusion_strikes", c.exclusion_strikes},
          {"rest_s", c.rest_s},
          {"personalized_rest_s", c.personalized_rest_s},
          {"min_total_s", c.min_total_s},
          {"max_total_s", c.max_total_s},
          {"min_clips", c.min_clips},
          {"max_clips", c.max_clips},
          {"clip_min_s", c.clip_min_s},
          {"clip_max_s", c.clip_max_s},
          {"compilation_min_s", c.compilation_min_s},
          {"compilation_max_s", c.compilation_max_s},
          {"personalized_minutes", c.personalized_minutes},
          {"good_rank", c.good_rank},
          {"target_minutes", c.target_minutes},
          {"max_sessions", c.max_sessions}};
}

json convergence_to_json(const ConvergenceStatus& s) {
  json d = json::array();
  for (auto e : s.deficient) d.push_back(emotion_str(e));
  return {{"status", convergence_name(s.kind)}, {"deficient", d}};
}

json profile_to_json(const SubjectProfile& p) {
  json rankings = json::array();
  for (const auto& rec : p.rankings) {
    json r = ranking_to_json(rec.ranking);
    r.erase("schema_version");
    r["target_emotion"] = emotion_str(rec.target);
    r["tags"] = rec.tags;
    r["duration_s"] = rec.duration_s;
    rankings.push_back(r);
  }
  json sessions = json::array();
  for (const auto& s : p.sessions) sessions.push_back(plan_to_json(s));
  json excluded = json::array();
  for (const auto& [tag, e] : p.excluded) excluded.push_back({{"tag", tag}, {"emotion", emotion_str(e)}});
  json resets = json::array();
  for (const auto& [key, at] : p.reset_at) {
    resets.push_back({{"tag", key.first}, {"emotion", emotion_str(key.second)}, {"from_ranking", at}});
  }
  json eff = json::array();
  for (const auto& [key, v] : p.effectiveness) {
    eff.push_back({{"tag", key.first}, {"emotion", emotion_str(key.second)}, {"value", v}});
  }
  return {{"schema_version", kProtocolSchemaVersion},
          {"subject_id", p.subject_id},
          {"questionnaire", questionnaire_to_json(p.questionnaire)},
          {"rankings", rankings},
          {"sessions", sessions},
          {"excluded", excluded},
          {"resets", resets},
          {"effectiveness", eff},
          {"convergence", convergence_to_json(p.convergence)}};
}

SubjectProfile profile_from_json(const json& j, const ProtocolConfig& config) {
  check_version(j, "profile");
  auto p = seed_profile(guarded("profile", [&] { return j.at("subject_id").get<std::string>(); }),
                        questionnaire_from_json(guarded("profile", [&] { return j.at("questionnaire"); })),
                        config);
  guarded("profile", [&] {
    for (const auto& s : j.value("sessions", json::array())) p.sessions.push_back(plan_from_json(s));
    for (const auto& r : j.value("rankings", json::array())) {
      json copy = r;
      copy["schema_version"] = kProtocolSchemaVersion;
      RankingRecord rec{ranking_from_json(copy), emotion_of(r.at("target_emotion")),
                        r.value("tags", std::set<std::string>{}), r.at("duration_s").get<double>()};
      p.rankings.push_back(std::move(rec));
    }
    for (const auto& x : j.value("excluded", json::array())) {
      p.excluded.insert({x.at("tag").get<std::string>(), emotion_of(x.at("emotion"))});
    }
    for (const auto& x : j.value("resets", json::array())) {
      p.reset_at[{x.at("tag").get<std::string>(), emotion_of(x.at("emotion"))}] =
          x.at("from_ranking").get<std::size_t>();
    }
    return 0;
  });
  replay(p, config);
  return p;
}

}  // namespace emobase::protocol
