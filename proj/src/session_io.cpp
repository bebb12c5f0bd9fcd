#include "dyscreen/session_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "dyscreen/error.hpp"

namespace dyscreen {

using nlohmann::json;

json participant_to_json(const ParticipantRecord& p) {
  json j = {{"id", p.id},
            {"gender", gender_token(p.gender)},
            {"native_spanish_monolingual", p.native_spanish_monolingual},
            {"failed_language_subject", p.failed_language_subject},
            {"age", p.age}};
  j["label"] = p.label ? json(label_token(*p.label)) : json(nullptr);
  return j;
}

ParticipantRecord participant_from_json(const json& j) {
  ParticipantRecord p;
  try {
    p.id = j.value("id", std::string{});
    const auto g = j.at("gender").get<std::string>();
    auto gender = parse_gender(g);
    if (!gender) throw DataError("unknown gender '" + g + "'");
    p.gender = *gender;
    p.native_spanish_monolingual = j.at("native_spanish_monolingual").get<bool>();
    p.failed_language_subject = j.at("failed_language_subject").get<bool>();
    p.age = j.at("age").get<int>();
    if (j.contains("label") && !j.at("label").is_null()) {
      const auto tok = j.at("label").get<std::string>();
      auto label = parse_label(tok);
      if (!label) throw DataError("unknown label token '" + tok + "'");
      p.label = *label;
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed participant: ") + e.what());
  }
  p.validate();
  return p;
}

json event_to_json(const InteractionEvent& e) {
  json j = {{"qid", e.qid}, {"item", e.item_index}, {"t", e.timestamp_ms}, {"kind", event_kind_token(e.kind)}};
  if (e.payload) j["payload"] = *e.payload;
  return j;
}

InteractionEvent event_from_json(const json& j) {
  InteractionEvent e;
  try {
    e.qid = j.at("qid").get<int>();
    e.item_index = j.value("item", 0);
    e.timestamp_ms = j.at("t").get<std::int64_t>();
    const auto tok = j.at("kind").get<std::string>();
    auto kind = parse_event_kind(tok);
    if (!kind) throw DataError("unknown event kind '" + tok + "'");
    e.kind = *kind;
    if (j.contains("payload") && !j.at("payload").is_null()) e.payload = j.at("payload").get<std::string>();
  } catch (const json::exception& ex) {
    throw DataError(std::string("malformed event: ") + ex.what());
  }
  if (e.qid < 1 || e.qid > kQuestionCount) throw DataError("event qid out of range: " + std::to_string(e.qid));
  if (e.item_index < 0) throw DataError("event item index must be >= 0");
  if (e.timestamp_ms < 0) throw DataError("event timestamp must be >= 0");
  if (e.kind == EventKind::SubmitText && !e.payload) throw DataError("submit_text event without payload");
  return e;
}

SessionLog read_session_log(std::istream& in) {
  SessionLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      if (!have_header) {
        log.session_id = j.at("session_id").get<std::string>();
        log.participant = participant_from_json(j.at("participant"));
        log.variant = AgeVariant::parse(j.at("variant").get<std::string>());
        log.completed = j.value("completed", false);
        have_header = true;
      } else {
        log.events.push_back(event_from_json(j));
      }
    } catch (const json::exception& e) {
      throw DataError(e.what(), line_no);
    } catch (const DataError& e) {
      if (e.line() != 0) throw;
      throw DataError(e.what(), line_no);
    }
  }
  if (!have_header) throw DataError("session log has no header line");
  return log;
}

SessionLog read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open session log " + path.string());
  return read_session_log(in);
}

void write_session_log(std::ostream& out, const SessionLog& log) {
  json header = {{"session_id", log.session_id},
                 {"participant", participant_to_json(log.participant)},
                 {"variant", log.variant.label()},
                 {"completed", log.completed}};
  out << header.dump() << '\n';
  for (const auto& e : log.events) out << event_to_json(e).dump() << '\n';
}

}  // namespace dyscreen
