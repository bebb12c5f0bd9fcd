#include "dyscreen/variant.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "dyscreen/error.hpp"

namespace dyscreen {
namespace {

std::vector<int> qid_range(std::initializer_list<std::pair<int, int>> ranges) {
  std::vector<int> out;
  for (auto [lo, hi] : ranges)
    for (int q = lo; q <= hi; ++q) out.push_back(q);
  return out;
}

}  // namespace

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::Clicks: return "clicks";
    case Measure::Hits: return "hits";
    case Measure::Misses: return "misses";
    case Measure::Score: return "score";
    case Measure::Accuracy: return "accuracy";
    case Measure::Missrate: return "missrate";
  }
  return "?";
}

AgeVariant AgeVariant::full() { return {VariantName::Full, qid_range({{1, 32}})}; }

AgeVariant AgeVariant::young7_8() {
  return {VariantName::Young7_8, qid_range({{1, 12}, {14, 17}, {22, 23}, {30, 30}})};
}

AgeVariant AgeVariant::mid9_11() {
  return {VariantName::Mid9_11, qid_range({{1, 20}, {22, 24}, {26, 28}, {30, 30}})};
}

AgeVariant AgeVariant::teen12_17() {
  return {VariantName::Teen12_17, qid_range({{1, 28}, {30, 32}})};
}

AgeVariant AgeVariant::standard(VariantName name) {
  switch (name) {
    case VariantName::Full: return full();
    case VariantName::Young7_8: return young7_8();
    case VariantName::Mid9_11: return mid9_11();
    case VariantName::Teen12_17: return teen12_17();
    case VariantName::Custom: break;
  }
  throw DataError("custom variants need an explicit question list");
}

AgeVariant AgeVariant::custom(std::vector<int> qids) {
  if (qids.empty()) throw DataError("custom variant needs at least one question");
  for (std::size_t i = 0; i < qids.size(); ++i) {
    if (qids[i] < 1 || qids[i] > kQuestionCount)
      throw DataError("question id out of range: " + std::to_string(qids[i]));
    if (i > 0 && qids[i] <= qids[i - 1]) throw DataError("custom variant qids must be ascending and unique");
  }
  return {VariantName::Custom, std::move(qids)};
}

AgeVariant AgeVariant::for_age(int age) {
  if (age >= 7 && age <= 8) return young7_8();
  if (age >= 9 && age <= 11) return mid9_11();
  if (age >= 12 && age <= 17) return teen12_17();
  throw DataError("age " + std::to_string(age) + " outside the supported range 7-17");
}

AgeVariant AgeVariant::parse(std::string_view text) {
  if (text == "full") return full();
  if (text == "young7_8") return young7_8();
  if (text == "mid9_11") return mid9_11();
  if (text == "teen12_17") return teen12_17();
  constexpr std::string_view prefix = "custom:";
  if (text.starts_with(prefix)) {
    std::vector<int> qids;
    std::string_view rest = text.substr(prefix.size());
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      int q = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), q);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw DataError("bad question id in variant: " + std::string(text));
      qids.push_back(q);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return custom(std::move(qids));
  }
  throw DataError("unknown variant: " + std::string(text));
}

std::string AgeVariant::label() const {
  switch (name_) {
    case VariantName::Full: return "full";
    case VariantName::Young7_8: return "young7_8";
    case VariantName::Mid9_11: return "mid9_11";
    case VariantName::Teen12_17: return "teen12_17";
    case VariantName::Custom: break;
  }
  std::string out = "custom:";
  for (std::size_t i = 0; i < qids_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(qids_[i]);
  }
  return out;
}

bool AgeVariant::contains(int qid) const { return position(qid).has_value(); }

std::optional<std::size_t> AgeVariant::position(int qid) const {
  auto it = std::lower_bound(qids_.begin(), qids_.end(), qid);
  if (it == qids_.end() || *it != qid) return std::nullopt;
  return static_cast<std::size_t>(it - qids_.begin());
}

std::size_t AgeVariant::block_offset(int qid) const {
  auto pos = position(qid);
  if (!pos) throw DataError("question " + std::to_string(qid) + " is not part of variant " + label());
  return kDemographicCount + kMeasuresPerQuestion * *pos;
}

std::vector<std::string> AgeVariant::feature_columns() const {
  std::vector<std::string> cols = {"gender", "native", "lang_fail", "age"};
  cols.reserve(feature_count());
  char buf[32];
  for (int q : qids_) {
    for (Measure m : kAllMeasures) {
      std::snprintf(buf, sizeof buf, "q%02d_%s", q, std::string(measure_name(m)).c_str());
      cols.emplace_back(buf);
    }
  }
  return cols;
}

std::pair<int, int> AgeVariant::age_range() const {
  switch (name_) {
    case VariantName::Young7_8: return {7, 8};
    case VariantName::Mid9_11: return {9, 11};
    case VariantName::Teen12_17: return {12, 17};
    default: return {7, 17};
  }
}

}  // namespace dyscreen
