#include "dyscreen/types.hpp"

#include "dyscreen/error.hpp"

namespace dyscreen {

std::string_view label_token(Label label) {
  return label == Label::Dyslexia ? "dys" : "nodys";
}

std::optional<Label> parse_label(std::string_view token) {
  if (token == "dys") return Label::Dyslexia;
  if (token == "nodys") return Label::NoDyslexia;
  return std::nullopt;
}

std::string_view gender_token(Gender gender) {
  return gender == Gender::Female ? "female" : "male";
}

std::optional<Gender> parse_gender(std::string_view token) {
  if (token == "female" || token == "F" || token == "f") return Gender::Female;
  if (token == "male" || token == "M" || token == "m") return Gender::Male;
  return std::nullopt;
}

void ParticipantRecord::validate() const {
  if (age < kMinAge || age > kMaxAge)
    throw DataError("age " + std::to_string(age) + " outside [7, 17] for participant '" + id + "'");
}

std::string_view event_kind_token(EventKind kind) {
  switch (kind) {
    case EventKind::ClickTarget: return "click_target";
    case EventKind::ClickDistractor: return "click_distractor";
    case EventKind::ClickNeutral: return "click_neutral";
    case EventKind::SubmitText: return "submit_text";
    case EventKind::QuestionStart: return "question_start";
    case EventKind::QuestionEnd: return "question_end";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view token) {
  for (EventKind k : {EventKind::ClickTarget, EventKind::ClickDistractor, EventKind::ClickNeutral,
                      EventKind::SubmitText, EventKind::QuestionStart, EventKind::QuestionEnd}) {
    if (event_kind_token(k) == token) return k;
  }
  return std::nullopt;
}

void QuestionMeasures::finish() {
  if (clicks > 0) {
    accuracy = static_cast<double>(hits) / static_cast<double>(clicks);
    missrate = static_cast<double>(misses) / static_cast<double>(clicks);
  } else {
    accuracy = 0.0;
    missrate = 0.0;
  }
}

double QuestionMeasures::value(Measure m) const {
  switch (m) {
    case Measure::Clicks: return static_cast<double>(clicks);
    case Measure::Hits: return static_cast<double>(hits);
    case Measure::Misses: return static_cast<double>(misses);
    case Measure::Score: return static_cast<double>(score);
    case Measure::Accuracy: return accuracy;
    case Measure::Missrate: return missrate;
  }
  return 0.0;
}

FeatureVector FeatureVector::with_demographics(const AgeVariant& variant, const ParticipantRecord& p) {
  FeatureVector fv{variant, std::vector<double>(variant.feature_count(), 0.0)};
  fv.values[kGenderIndex] = p.gender == Gender::Male ? 1.0 : 0.0;
  fv.values[kNativeIndex] = p.native_spanish_monolingual ? 1.0 : 0.0;
  fv.values[kLangFailIndex] = p.failed_language_subject ? 1.0 : 0.0;
  fv.values[kAgeIndex] = static_cast<double>(p.age);
  return fv;
}

namespace {

std::vector<double> restrict_values(const std::vector<double>& values, const AgeVariant& from,
                                    const AgeVariant& to) {
  std::vector<double> out(values.begin(), values.begin() + kDemographicCount);
  out.reserve(to.feature_count());
  for (int q : to.qids()) {
    const std::size_t off = from.block_offset(q);
    out.insert(out.end(), values.begin() + static_cast<std::ptrdiff_t>(off),
               values.begin() + static_cast<std::ptrdiff_t>(off + kMeasuresPerQuestion));
  }
  return out;
}

}  // namespace

FeatureVector FeatureVector::restricted_to(const AgeVariant& target) const {
  return {target, restrict_values(values, variant, target)};
}

std::size_t Dataset::count(Label label) const {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.participant.label == label) ++n;
  return n;
}

void Dataset::require_labeled() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].participant.label)
      throw DataError("record " + std::to_string(i) + " ('" + records[i].participant.id +
                      "') has no label; training and evaluation need labeled data");
    if (records[i].features.size() != variant.feature_count())
      throw DataError("record " + std::to_string(i) + " has " + std::to_string(records[i].features.size()) +
                      " features, variant " + variant.label() + " needs " +
                      std::to_string(variant.feature_count()));
  }
}

Dataset Dataset::restricted_to(const AgeVariant& target) const {
  Dataset out{target, {}};
  out.records.reserve(records.size());
  for (const auto& r : records)
    out.records.push_back({r.participant, restrict_values(r.features, variant, target)});
  return out;
}

Dataset slice_by_age(const Dataset& dataset, int lo, int hi) {
  if (lo < kMinAge || hi > kMaxAge || lo > hi)
    throw DataError("age slice [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "] must satisfy 7 <= lo <= hi <= 17");
  Dataset out{dataset.variant, {}};
  for (const auto& r : dataset.records)
    if (r.participant.age >= lo && r.participant.age <= hi) out.records.push_back(r);
  return out;
}

}  // namespace dyscreen
