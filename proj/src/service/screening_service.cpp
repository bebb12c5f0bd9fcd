#include "dyscreen/service/screening_service.hpp"

#include <chrono>
#include <mutex>

#include "dyscreen/error.hpp"
#include "dyscreen/features.hpp"
#include "dyscreen/session_io.hpp"
#include "dyscreen/service/errors.hpp"
#include "dyscreen/service/storage.hpp"

namespace dyscreen::service {

namespace fs = std::filesystem;
using nlohmann::json;

struct ScreeningService::Session {
  std::mutex mutex;
  std::string id;
  ParticipantRecord participant;
  AgeVariant variant = AgeVariant::full();
  std::int64_t created_at_ms = 0;
  SessionStatus status = SessionStatus::Open;
  std::vector<InteractionEvent> events;
  std::map<std::uint64_t, std::string> batches;  ///< seq -> serialized events
  std::map<std::uint64_t, std::size_t> batch_sizes;
  std::optional<FinalizeResult> result;
  fs::path file;
};

namespace {

json events_json(const std::vector<InteractionEvent>& events) {
  json out = json::array();
  for (const auto& e : events) out.push_back(event_to_json(e));
  return out;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Prediction prediction_from_json(const json& j) {
  Prediction p;
  p.score = j.at("score").get<double>();
  p.flagged = j.at("flagged").get<bool>();
  p.threshold = j.at("threshold").get<double>();
  p.model_version = j.at("model_version").get<std::string>();
  p.variant = AgeVariant::parse(j.at("variant").get<std::string>());
  return p;
}

[[noreturn]] void not_found(const std::string& id) {
  throw ServiceError(404, "not_found", "no session '" + id + "'", {{"session_id", id}});
}

}  // namespace

std::string_view status_token(SessionStatus s) {
  switch (s) {
    case SessionStatus::Open: return "open";
    case SessionStatus::Finalized: return "finalized";
    case SessionStatus::Abandoned: return "abandoned";
  }
  return "open";
}

json prediction_to_json(const Prediction& p) {
  return {{"score", p.score},
          {"flagged", p.flagged},
          {"threshold", p.threshold},
          {"model_version", p.model_version},
          {"variant", p.variant.label()}};
}

json session_view_to_json(const SessionView& v) {
  auto participant = participant_to_json(v.participant);
  participant.erase("label");
  participant["id_hash"] = participant.at("id");
  participant.erase("id");
  json out = {{"session_id", v.session_id},
              {"status", status_token(v.status)},
              {"variant", v.variant.label()},
              {"questions", v.variant.qids()},
              {"participant", participant},
              {"created_at_ms", v.created_at_ms},
              {"event_count", v.event_count},
              {"prediction", nullptr}};
  if (v.result) {
    out["prediction"] = prediction_to_json(v.result->prediction);
    out["features"] = v.result->features.values;
  }
  return out;
}

ScreeningService::ScreeningService(QuestionManifest manifest, fs::path data_dir, ModelRegistry& registry)
    : manifest_(std::move(manifest)), dir_(std::move(data_dir)), registry_(registry) {
  if (dir_.empty()) throw std::invalid_argument("screening service needs a data directory");
  fs::create_directories(dir_ / "sessions");
  const auto salt_file = dir_ / "salt";
  if (fs::exists(salt_file)) {
    salt_ = read_file(salt_file);
  } else {
    salt_ = random_hex(16);
    write_file_atomic(salt_file, salt_);
  }
  load_all();
}

ScreeningService::~ScreeningService() = default;

void ScreeningService::load_all() {
  const auto index = dir_ / "sessions" / "index.jsonl";
  if (!fs::exists(index)) return;
  std::string tail;
  const auto lines = read_lines(index, &tail);
  if (!tail.empty()) fs::resize_file(index, fs::file_size(index) - tail.size());
  for (const auto& line : lines) {
    const auto id = json::parse(line).at("session_id").get<std::string>();
    if (fs::exists(dir_ / "sessions" / (id + ".jsonl"))) load_session(id);
  }
}

void ScreeningService::load_session(const std::string& id) {
  auto s = std::make_shared<Session>();
  s->id = id;
  s->file = dir_ / "sessions" / (id + ".jsonl");
  std::string tail;
  const auto lines = read_lines(s->file, &tail);
  if (!tail.empty()) fs::resize_file(s->file, fs::file_size(s->file) - tail.size());
  if (lines.empty()) return;  // creation record never completed
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const auto rec = json::parse(lines[i]);
      const auto type = rec.at("type").get<std::string>();
      if (type == "created") {
        s->participant = participant_from_json(rec.at("participant"));
        s->variant = AgeVariant::parse(rec.at("variant").get<std::string>());
        s->created_at_ms = rec.at("created_at_ms").get<std::int64_t>();
      } else if (type == "events") {
        const auto seq = rec.at("seq").get<std::uint64_t>();
        std::size_t count = 0;
        for (const auto& e : rec.at("events")) {
          s->events.push_back(event_from_json(e));
          ++count;
        }
        s->batches[seq] = rec.at("events").dump();
        s->batch_sizes[seq] = count;
      } else if (type == "finalized") {
        FinalizeResult r;
        r.prediction = prediction_from_json(rec.at("prediction"));
        r.features.variant = s->variant;
        r.features.values = rec.at("features").get<std::vector<double>>();
        s->result = std::move(r);
        s->status = SessionStatus::Finalized;
      } else if (type == "abandoned") {
        s->status = SessionStatus::Abandoned;
      } else {
        throw DataError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw DataError(s->file.string() + ": " + e.what(), i + 1);
    } catch (const DataError& e) {
      throw DataError(s->file.string() + ": " + e.what(), i + 1);
    }
  }
  sessions_[id] = std::move(s);
}

std::shared_ptr<ScreeningService::Session> ScreeningService::lookup(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) not_found(id);
  return it->second;
}

ScreeningService::Created ScreeningService::create_session(ParticipantRecord p) {
  p.validate();
  p.label.reset();
  if (!p.id.empty()) p.id = "sha256:" + sha256_hex(salt_ + ":" + p.id);

  auto s = std::make_shared<Session>();
  s->id = random_hex(16);
  s->participant = std::move(p);
  s->variant = AgeVariant::for_age(s->participant.age);
  s->created_at_ms = now_ms();
  s->file = dir_ / "sessions" / (s->id + ".jsonl");

  const json rec = {{"type", "created"},
                    {"session_id", s->id},
                    {"participant", participant_to_json(s->participant)},
                    {"variant", s->variant.label()},
                    {"created_at_ms", s->created_at_ms}};
  append_line_durable(s->file, rec.dump());
  append_line_durable(dir_ / "sessions" / "index.jsonl", json{{"session_id", s->id}}.dump());

  Created out{s->id, s->variant};
  std::unique_lock lock(mutex_);
  sessions_[s->id] = std::move(s);
  return out;
}

void ScreeningService::validate_batch(const Session& s, const std::vector<InteractionEvent>& events) const {
  for (const auto& e : events) {
    if (!s.variant.contains(e.qid))
      throw MalformedSessionError("event for Q" + std::to_string(e.qid) + " is outside variant " + s.variant.label());
    const auto& spec = manifest_.question(e.qid);
    if (e.item_index < 0 || static_cast<std::size_t>(e.item_index) >= spec.item_count())
      throw MalformedSessionError("Q" + std::to_string(e.qid) + " has no item " + std::to_string(e.item_index));
    if (e.kind == EventKind::SubmitText && !e.payload)
      throw MalformedSessionError("submit_text event without text");
  }
  SessionLog log;
  log.session_id = s.id;
  log.variant = s.variant;
  log.events = s.events;
  log.events.insert(log.events.end(), events.begin(), events.end());
  validate_session_events(log);
}

AppendAck ScreeningService::append_events(const std::string& id, std::uint64_t seq,
                                          const std::vector<InteractionEvent>& events) {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  const auto serialized = events_json(events).dump();
  if (const auto it = s->batches.find(seq); it != s->batches.end()) {
    if (it->second != serialized)
      throw ServiceError(409, "sequence_conflict",
                         "batch " + std::to_string(seq) + " was already received with different events",
                         {{"seq", seq}});
    return {s->batch_sizes.at(seq), true, s->events.size()};
  }
  if (s->status != SessionStatus::Open)
    throw ServiceError(409, "session_closed", "session " + id + " is " + std::string(status_token(s->status)),
                       {{"status", status_token(s->status)}});
  validate_batch(*s, events);

  const json rec = {{"type", "events"}, {"seq", seq}, {"events", json::parse(serialized)}};
  append_line_durable(s->file, rec.dump());
  s->events.insert(s->events.end(), events.begin(), events.end());
  s->batches[seq] = serialized;
  s->batch_sizes[seq] = events.size();
  return {events.size(), false, s->events.size()};
}

FinalizeResult ScreeningService::finalize(const std::string& id) {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  if (s->status == SessionStatus::Finalized) return *s->result;
  if (s->status == SessionStatus::Abandoned)
    throw ServiceError(409, "session_closed", "session " + id + " was abandoned", {{"status", "abandoned"}});

  SessionLog log;
  log.session_id = s->id;
  log.participant = s->participant;
  log.variant = s->variant;
  log.events = s->events;
  log.completed = true;
  FeatureVector features = extract_features(log, manifest_);

  const auto model = registry_.active(s->variant.name());
  if (!model)
    throw ServiceError(503, "no_active_model", "no active model for variant " + s->variant.label(),
                       {{"variant", s->variant.label()}});
  if (finalize_hook_) finalize_hook_(id);

  FinalizeResult result;
  result.prediction.score = predict_score(*model->model, features.values);
  result.prediction.threshold = model->model->threshold;
  result.prediction.flagged = classify_score(result.prediction.score, result.prediction.threshold) == Label::Dyslexia;
  result.prediction.model_version = model->version;
  result.prediction.variant = s->variant;
  result.features = std::move(features);

  const json rec = {{"type", "finalized"},
                    {"prediction", prediction_to_json(result.prediction)},
                    {"features", result.features.values}};
  append_line_durable(s->file, rec.dump());
  s->result = result;
  s->status = SessionStatus::Finalized;
  return result;
}

void ScreeningService::abandon(const std::string& id) {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  if (s->status == SessionStatus::Abandoned) return;
  if (s->status == SessionStatus::Finalized)
    throw ServiceError(409, "session_closed", "session " + id + " is already finalized", {{"status", "finalized"}});
  append_line_durable(s->file, json{{"type", "abandoned"}, {"at_ms", now_ms()}}.dump());
  s->status = SessionStatus::Abandoned;
}

SessionView ScreeningService::view_of(const Session& s) const {
  return {s.id, s.participant, s.variant, s.status, s.created_at_ms, s.events.size(), s.result};
}

SessionView ScreeningService::get(const std::string& id) const {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  return view_of(*s);
}

std::vector<SessionView> ScreeningService::list() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  std::vector<SessionView> out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mutex);
    out.push_back(view_of(*s));
  }
  return out;
}

SessionLog ScreeningService::session_log(const std::string& id) const {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  SessionLog log;
  log.session_id = s->id;
  log.participant = s->participant;
  log.variant = s->variant;
  log.events = s->events;
  log.completed = true;
  return log;
}

}  // namespace dyscreen::service
