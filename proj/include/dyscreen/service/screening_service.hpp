#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyscreen/manifest.hpp"
#include "dyscreen/service/model_registry.hpp"
#include "dyscreen/types.hpp"

namespace dyscreen::service {

enum class SessionStatus { Open, Finalized, Abandoned };
std::string_view status_token(SessionStatus s);

struct Prediction {
  double score = 0;
  bool flagged = false;  ///< score >= threshold
  double threshold = 0;
  std::string model_version;
  AgeVariant variant = AgeVariant::full();

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct FinalizeResult {
  Prediction prediction;
  FeatureVector features;
};

struct SessionView {
  std::string session_id;
  ParticipantRecord participant;  ///< id holds the salted hash
  AgeVariant variant = AgeVariant::full();
  SessionStatus status = SessionStatus::Open;
  std::int64_t created_at_ms = 0;
  std::size_t event_count = 0;
  std::optional<FinalizeResult> result;
};

struct AppendAck {
  std::size_t accepted = 0;
  bool duplicate = false;
  std::size_t total_events = 0;
};

nlohmann::json prediction_to_json(const Prediction& p);
nlohmann::json session_view_to_json(const SessionView& v);

/// Session lifecycle on top of flat files: data_dir/sessions/<id>.jsonl per session plus
/// data_dir/sessions/index.jsonl, all append-only. Restarting on the same directory restores
/// every session.
class ScreeningService {
 public:
  ScreeningService(QuestionManifest manifest, std::filesystem::path data_dir, ModelRegistry& registry);
  ~ScreeningService();

  struct Created {
    std::string session_id;
    AgeVariant variant;
  };
  /// Variant comes from the participant's age. The participant id is stored only as a salted hash.
  Created create_session(ParticipantRecord demographics);

  /// Idempotent per `seq`: a repeat with identical events is acknowledged without appending,
  /// a repeat with different events is a conflict.
  AppendAck append_events(const std::string& session_id, std::uint64_t seq, const std::vector<InteractionEvent>& events);

  /// Scores with the variant's active model. Repeated calls return the stored result.
  FinalizeResult finalize(const std::string& session_id);
  void abandon(const std::string& session_id);

  SessionView get(const std::string& session_id) const;
  std::vector<SessionView> list() const;
  /// Stored events as a completed SessionLog, for replay.
  SessionLog session_log(const std::string& session_id) const;

  const QuestionManifest& manifest() const noexcept { return manifest_; }

  /// Test hook: runs inside finalize after the model snapshot is taken, before scoring.
  void set_finalize_hook(std::function<void(const std::string&)> hook) { finalize_hook_ = std::move(hook); }

 private:
  struct Session;

  std::shared_ptr<Session> lookup(const std::string& id) const;
  void load_all();
  void load_session(const std::string& id);
  void validate_batch(const Session& s, const std::vector<InteractionEvent>& events) const;
  SessionView view_of(const Session& s) const;

  QuestionManifest manifest_;
  std::filesystem::path dir_;
  ModelRegistry& registry_;
  std::string salt_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::function<void(const std::string&)> finalize_hook_;
};

}  // namespace dyscreen::service
