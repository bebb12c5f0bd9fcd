#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyscreen/types.hpp"

namespace dyscreen {

double entropy_bits(double positive, double negative);

/// Best binary split entropy reduction (bits) of one numeric column against the labels.
double info_gain(std::span<const double> values, std::span<const std::uint8_t> positive);
double info_gain(const Dataset& dataset, std::size_t feature_index);

/// Gain of every feature column, in column order.
std::vector<double> feature_gains(const Dataset& dataset);

struct ImportanceEntry {
  std::string group;  ///< "Q7", "Demog.", "Hits", "Demography", ...
  double mean_gain = 0;
  double percent = 0;  ///< normalized so the top group is 100
};

/// One entry per variant question (mean of its six gains) plus "Demog." (mean of four),
/// in qid order with the demographic group last.
std::vector<ImportanceEntry> question_importance(const Dataset& dataset);

/// One entry per measure type (mean over questions) plus "Demography".
std::vector<ImportanceEntry> type_importance(const Dataset& dataset);

/// Sorted copy, highest percent first; equal values keep input order.
std::vector<ImportanceEntry> ranked(std::vector<ImportanceEntry> entries);

/// qids of the `count` most important questions, ascending.
std::vector<int> top_questions(const std::vector<ImportanceEntry>& question_entries, std::size_t count);

}  // namespace dyscreen
