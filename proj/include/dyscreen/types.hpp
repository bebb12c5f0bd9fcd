#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dyscreen/variant.hpp"

namespace dyscreen {

enum class Gender { Female, Male };
enum class Label { Dyslexia, NoDyslexia };

inline constexpr int kMinAge = 7;
inline constexpr int kMaxAge = 17;

/// "dys" / "nodys".
std::string_view label_token(Label label);
/// Parses "dys" / "nodys"; nullopt otherwise.
std::optional<Label> parse_label(std::string_view token);

std::string_view gender_token(Gender gender);
std::optional<Gender> parse_gender(std::string_view token);

struct ParticipantRecord {
  std::string id;
  Gender gender = Gender::Female;
  bool native_spanish_monolingual = true;
  bool failed_language_subject = false;
  int age = kMinAge;
  std::optional<Label> label;

  /// Throws DataError when age is outside [7, 17].
  void validate() const;

  friend bool operator==(const ParticipantRecord&, const ParticipantRecord&) = default;
};

enum class EventKind { ClickTarget, ClickDistractor, ClickNeutral, SubmitText, QuestionStart, QuestionEnd };

std::string_view event_kind_token(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view token);

inline bool is_interaction(EventKind k) {
  return k != EventKind::QuestionStart && k != EventKind::QuestionEnd;
}

struct InteractionEvent {
  int qid = 1;
  int item_index = 0;
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::ClickNeutral;
  std::optional<std::string> payload;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

/// Longest admissible span between the first QuestionStart and the last QuestionEnd.
inline constexpr std::int64_t kSessionCapMs = 15 * 60 * 1000;

struct SessionLog {
  std::string session_id;
  ParticipantRecord participant;
  AgeVariant variant = AgeVariant::full();
  std::vector<InteractionEvent> events;
  bool completed = false;
};

struct QuestionMeasures {
  int qid = 0;
  std::int64_t clicks = 0;
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t score = 0;
  double accuracy = 0.0;
  double missrate = 0.0;

  /// Sets accuracy/missrate from the counts; 0/0 is defined as 0.
  void finish();
  double value(Measure m) const;

  friend bool operator==(const QuestionMeasures&, const QuestionMeasures&) = default;
};

struct FeatureVector {
  AgeVariant variant = AgeVariant::full();
  std::vector<double> values;

  /// Demographic encodings: Female 0 / Male 1, monolingual 1/0, failed subject 1/0, raw age.
  static FeatureVector with_demographics(const AgeVariant& variant, const ParticipantRecord& p);

  /// Keeps only the blocks of `target`'s questions. Every target qid must be present here.
  FeatureVector restricted_to(const AgeVariant& target) const;
};

struct DatasetRecord {
  ParticipantRecord participant;
  std::vector<double> features;
};

struct Dataset {
  AgeVariant variant = AgeVariant::full();
  std::vector<DatasetRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t count(Label label) const;
  /// Throws DataError if any record is unlabeled or has the wrong vector length.
  void require_labeled() const;
  /// Column subset for another variant whose qids are a subset of this one's.
  Dataset restricted_to(const AgeVariant& target) const;
};

/// Records with lo <= age <= hi, order preserved. Requires 7 <= lo <= hi <= 17.
Dataset slice_by_age(const Dataset& dataset, int lo, int hi);

}  // namespace dyscreen
