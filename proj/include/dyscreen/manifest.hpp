#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dyscreen/variant.hpp"

namespace dyscreen {

enum class Archetype {
  WhacAMole,
  AudioChoice,
  VisualSearchPairs,
  FillMissingLetter,
  DeleteExtraLetter,
  FindSentenceError,
  ReorderLetters,
  ReorderSyllables,
  SeparateWords,
  MemorySequence,
  Dictation,
};

std::string_view archetype_token(Archetype a);
std::optional<Archetype> parse_archetype(std::string_view token);

/// Click-based archetypes need distractors for every item.
bool requires_distractors(Archetype a);

/// Cognitive indicators an exercise is designed to target.
enum class Indicator {
  // language skills
  AlphabeticAwareness,
  PhonologicalAwareness,
  SyllabicAwareness,
  LexicalAwareness,
  MorphologicalAwareness,
  SyntacticAwareness,
  SemanticAwareness,
  OrthographicAwareness,
  // working memory
  VisualWorkingMemory,
  AuditoryWorkingMemory,
  SequentialAuditoryWorkingMemory,
  SequentialVisualWorkingMemory,
  // executive functions
  ActivationAndAttention,
  SustainedAttention,
  SimultaneousAttention,
  // perceptual processes
  VisualDiscrimination,
  AuditoryDiscrimination,
};

std::string_view indicator_token(Indicator i);
std::optional<Indicator> parse_indicator(std::string_view token);

struct StimulusItem {
  std::string prompt_audio;  // asset id, never embedded audio
  std::vector<std::string> targets;
  std::vector<std::string> distractors;
  std::optional<std::string> display;  // text shown on screen, if any
  std::optional<double> display_seconds;  // stimulus hidden after this long (memory tasks)
};

struct QuestionSpec {
  int qid = 0;
  Archetype archetype = Archetype::WhacAMole;
  std::vector<StimulusItem> items;
  std::optional<double> time_limit_s;
  std::set<Indicator> indicators;
  std::vector<std::string> variants;  // variant labels this question belongs to

  std::size_t item_count() const noexcept { return items.size(); }
};

inline constexpr int kManifestVersion = 1;

class QuestionManifest {
 public:
  QuestionManifest() = default;
  /// Validates and takes ownership. Throws DataError listing the first violation.
  QuestionManifest(int version, std::string language, std::vector<QuestionSpec> questions);

  static QuestionManifest from_json(const nlohmann::json& doc);
  static QuestionManifest load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// JSON restricted to a variant's questions (what the client fetches).
  nlohmann::json to_json(const AgeVariant& variant) const;

  int version() const noexcept { return version_; }
  const std::string& language() const noexcept { return language_; }
  const std::vector<QuestionSpec>& questions() const noexcept { return questions_; }
  /// qid in 1..32; the manifest always holds all 32.
  const QuestionSpec& question(int qid) const;

 private:
  void validate() const;

  int version_ = kManifestVersion;
  std::string language_ = "es";
  std::vector<QuestionSpec> questions_;  // sorted by qid
};

}  // namespace dyscreen
