#include "dyscreen/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "dyscreen/error.hpp"

namespace dyscreen {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Archetype, std::string_view>, 11> kArchetypes = {{
    {Archetype::WhacAMole, "WhacAMole"},
    {Archetype::AudioChoice, "AudioChoice"},
    {Archetype::VisualSearchPairs, "VisualSearchPairs"},
    {Archetype::FillMissingLetter, "FillMissingLetter"},
    {Archetype::DeleteExtraLetter, "DeleteExtraLetter"},
    {Archetype::FindSentenceError, "FindSentenceError"},
    {Archetype::ReorderLetters, "ReorderLetters"},
    {Archetype::ReorderSyllables, "ReorderSyllables"},
    {Archetype::SeparateWords, "SeparateWords"},
    {Archetype::MemorySequence, "MemorySequence"},
    {Archetype::Dictation, "Dictation"},
}};

constexpr std::array<std::pair<Indicator, std::string_view>, 17> kIndicators = {{
    {Indicator::AlphabeticAwareness, "alphabetic_awareness"},
    {Indicator::PhonologicalAwareness, "phonological_awareness"},
    {Indicator::SyllabicAwareness, "syllabic_awareness"},
    {Indicator::LexicalAwareness, "lexical_awareness"},
    {Indicator::MorphologicalAwareness, "morphological_awareness"},
    {Indicator::SyntacticAwareness, "syntactic_awareness"},
    {Indicator::SemanticAwareness, "semantic_awareness"},
    {Indicator::OrthographicAwareness, "orthographic_awareness"},
    {Indicator::VisualWorkingMemory, "visual_working_memory"},
    {Indicator::AuditoryWorkingMemory, "auditory_working_memory"},
    {Indicator::SequentialAuditoryWorkingMemory, "sequential_auditory_working_memory"},
    {Indicator::SequentialVisualWorkingMemory, "sequential_visual_working_memory"},
    {Indicator::ActivationAndAttention, "activation_and_attention"},
    {Indicator::SustainedAttention, "sustained_attention"},
    {Indicator::SimultaneousAttention, "simultaneous_attention"},
    {Indicator::VisualDiscrimination, "visual_discrimination"},
    {Indicator::AuditoryDiscrimination, "auditory_discrimination"},
}};

std::string where(int qid) { return "manifest question " + std::to_string(qid) + ": "; }

QuestionSpec question_from_json(const json& j) {
  QuestionSpec q;
  q.qid = j.at("qid").get<int>();
  const auto arch = j.at("archetype").get<std::string>();
  auto a = parse_archetype(arch);
  if (!a) throw DataError(where(q.qid) + "unknown archetype '" + arch + "'");
  q.archetype = *a;
  if (j.contains("time_limit") && !j.at("time_limit").is_null()) q.time_limit_s = j.at("time_limit").get<double>();
  for (const auto& tag : j.at("indicators")) {
    auto ind = parse_indicator(tag.get<std::string>());
    if (!ind) throw DataError(where(q.qid) + "unknown indicator '" + tag.get<std::string>() + "'");
    q.indicators.insert(*ind);
  }
  q.variants = j.value("variants", std::vector<std::string>{});
  for (const auto& item : j.at("items")) {
    StimulusItem s;
    s.prompt_audio = item.value("prompt_audio", std::string{});
    s.targets = item.at("targets").get<std::vector<std::string>>();
    s.distractors = item.value("distractors", std::vector<std::string>{});
    if (item.contains("display") && !item.at("display").is_null()) s.display = item.at("display").get<std::string>();
    if (item.contains("display_seconds") && !item.at("display_seconds").is_null())
      s.display_seconds = item.at("display_seconds").get<double>();
    q.items.push_back(std::move(s));
  }
  return q;
}

json question_to_json(const QuestionSpec& q) {
  json items = json::array();
  for (const auto& s : q.items) {
    json item = {{"prompt_audio", s.prompt_audio}, {"targets", s.targets}, {"distractors", s.distractors}};
    if (s.display) item["display"] = *s.display;
    if (s.display_seconds) item["display_seconds"] = *s.display_seconds;
    items.push_back(std::move(item));
  }
  json indicators = json::array();
  for (Indicator i : q.indicators) indicators.push_back(indicator_token(i));
  json out = {{"qid", q.qid},
              {"archetype", archetype_token(q.archetype)},
              {"indicators", std::move(indicators)},
              {"variants", q.variants},
              {"item_count", q.item_count()},
              {"items", std::move(items)}};
  out["time_limit"] = q.time_limit_s ? json(*q.time_limit_s) : json(nullptr);
  return out;
}

}  // namespace

std::string_view archetype_token(Archetype a) {
  for (auto [k, v] : kArchetypes)
    if (k == a) return v;
  return "?";
}

std::optional<Archetype> parse_archetype(std::string_view token) {
  for (auto [k, v] : kArchetypes)
    if (v == token) return k;
  return std::nullopt;
}

bool requires_distractors(Archetype a) {
  return a == Archetype::WhacAMole || a == Archetype::AudioChoice || a == Archetype::VisualSearchPairs;
}

std::string_view indicator_token(Indicator i) {
  for (auto [k, v] : kIndicators)
    if (k == i) return v;
  return "?";
}

std::optional<Indicator> parse_indicator(std::string_view token) {
  for (auto [k, v] : kIndicators)
    if (v == token) return k;
  return std::nullopt;
}

QuestionManifest::QuestionManifest(int version, std::string language, std::vector<QuestionSpec> questions)
    : version_(version), language_(std::move(language)), questions_(std::move(questions)) {
  std::sort(questions_.begin(), questions_.end(),
            [](const QuestionSpec& a, const QuestionSpec& b) { return a.qid < b.qid; });
  validate();
}

void QuestionManifest::validate() const {
  if (version_ != kManifestVersion)
    throw DataError("unsupported manifest version " + std::to_string(version_));
  std::array<int, kQuestionCount + 1> seen{};
  for (const auto& q : questions_) {
    if (q.qid < 1 || q.qid > kQuestionCount) throw DataError("manifest qid out of range: " + std::to_string(q.qid));
    if (++seen[static_cast<std::size_t>(q.qid)] > 1) throw DataError(where(q.qid) + "appears more than once");
    if (q.items.empty()) throw DataError(where(q.qid) + "needs at least one item");
    if (q.indicators.empty()) throw DataError(where(q.qid) + "needs at least one cognitive indicator");
    for (std::size_t i = 0; i < q.items.size(); ++i) {
      if (q.items[i].targets.empty())
        throw DataError(where(q.qid) + "item " + std::to_string(i) + " has no target");
      if (requires_distractors(q.archetype) && q.items[i].distractors.empty())
        throw DataError(where(q.qid) + "item " + std::to_string(i) + " needs a distractor");
    }
    if (q.time_limit_s && *q.time_limit_s <= 0) throw DataError(where(q.qid) + "time_limit must be positive");
    for (VariantName v : {VariantName::Full, VariantName::Young7_8, VariantName::Mid9_11, VariantName::Teen12_17}) {
      const auto variant = AgeVariant::standard(v);
      const bool listed = std::find(q.variants.begin(), q.variants.end(), variant.label()) != q.variants.end();
      if (listed != variant.contains(q.qid))
        throw DataError(where(q.qid) + "variant membership for " + variant.label() + " disagrees with the test layout");
    }
  }
  for (int q = 1; q <= kQuestionCount; ++q)
    if (seen[static_cast<std::size_t>(q)] == 0) throw DataError("manifest is missing question " + std::to_string(q));
}

QuestionManifest QuestionManifest::from_json(const json& doc) {
  try {
    std::vector<QuestionSpec> questions;
    for (const auto& q : doc.at("questions")) questions.push_back(question_from_json(q));
    return QuestionManifest(doc.at("version").get<int>(), doc.value("language", std::string("es")),
                            std::move(questions));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

QuestionManifest QuestionManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

json QuestionManifest::to_json() const {
  json qs = json::array();
  for (const auto& q : questions_) qs.push_back(question_to_json(q));
  return {{"version", version_}, {"language", language_}, {"questions", std::move(qs)}};
}

json QuestionManifest::to_json(const AgeVariant& variant) const {
  json qs = json::array();
  for (const auto& q : questions_)
    if (variant.contains(q.qid)) qs.push_back(question_to_json(q));
  return {{"version", version_}, {"language", language_}, {"variant", variant.label()}, {"questions", std::move(qs)}};
}

const QuestionSpec& QuestionManifest::question(int qid) const {
  if (qid < 1 || qid > static_cast<int>(questions_.size()))
    throw DataError("no question " + std::to_string(qid) + " in manifest");
  return questions_[static_cast<std::size_t>(qid - 1)];
}

}  // namespace dyscreen
