#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dyscreen {

inline constexpr int kQuestionCount = 32;
inline constexpr std::size_t kDemographicCount = 4;
inline constexpr std::size_t kMeasuresPerQuestion = 6;

enum class VariantName { Full, Young7_8, Mid9_11, Teen12_17, Custom };

/// The six per-question measures, in feature-block order.
enum class Measure { Clicks = 0, Hits, Misses, Score, Accuracy, Missrate };

inline constexpr std::array<Measure, kMeasuresPerQuestion> kAllMeasures = {
    Measure::Clicks, Measure::Hits,     Measure::Misses,
    Measure::Score,  Measure::Accuracy, Measure::Missrate};

std::string_view measure_name(Measure m);

/// Test variant: which questions are administered, and therefore which feature blocks exist.
/// The four standard variants come from the factory functions; Custom variants are used for
/// feature-subset experiments.
class AgeVariant {
 public:
  static AgeVariant full();
  static AgeVariant young7_8();
  static AgeVariant mid9_11();
  static AgeVariant teen12_17();
  static AgeVariant standard(VariantName name);
  /// Any ascending subset of 1..32. Throws DataError on bad qids.
  static AgeVariant custom(std::vector<int> qids);

  /// Variant served to a participant of the given age (7-8, 9-11, 12-17).
  static AgeVariant for_age(int age);

  /// Accepts "full", "young7_8", "mid9_11", "teen12_17" and "custom:1,2,5".
  static AgeVariant parse(std::string_view text);

  VariantName name() const noexcept { return name_; }
  std::string label() const;
  const std::vector<int>& qids() const& noexcept { return qids_; }
  std::vector<int> qids() && { return std::move(qids_); }
  std::size_t question_count() const noexcept { return qids_.size(); }
  std::size_t feature_count() const noexcept {
    return kDemographicCount + kMeasuresPerQuestion * qids_.size();
  }

  bool contains(int qid) const;
  /// Position of qid within this variant's question list; nullopt when absent.
  std::optional<std::size_t> position(int qid) const;

  /// 0-based index of the first feature of qid's block. Throws DataError if qid is absent.
  std::size_t block_offset(int qid) const;
  std::size_t feature_index(int qid, Measure m) const {
    return block_offset(qid) + static_cast<std::size_t>(m);
  }

  /// CSV column names of the feature part (after id,label), demographic columns first.
  std::vector<std::string> feature_columns() const;

  /// Inclusive age range this variant targets ([7,17] for Full and Custom).
  std::pair<int, int> age_range() const;

  friend bool operator==(const AgeVariant& a, const AgeVariant& b) {
    return a.name_ == b.name_ && a.qids_ == b.qids_;
  }

 private:
  AgeVariant(VariantName name, std::vector<int> qids) : name_(name), qids_(std::move(qids)) {}

  VariantName name_;
  std::vector<int> qids_;
};

/// Demographic feature indices.
inline constexpr std::size_t kGenderIndex = 0;
inline constexpr std::size_t kNativeIndex = 1;
inline constexpr std::size_t kLangFailIndex = 2;
inline constexpr std::size_t kAgeIndex = 3;

}  // namespace dyscreen
