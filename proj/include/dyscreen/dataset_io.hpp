#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dyscreen/types.hpp"

namespace dyscreen {

enum class LabelPolicy { Required, Optional };

/// Parses the dataset CSV. The header must list exactly `variant`'s columns.
/// Errors carry the 1-based line number of the offending row.
Dataset read_dataset_csv(std::istream& in, const AgeVariant& variant,
                         LabelPolicy labels = LabelPolicy::Required);
Dataset read_dataset_csv(const std::filesystem::path& path, const AgeVariant& variant,
                         LabelPolicy labels = LabelPolicy::Required);

/// Recovers the variant from a header line (standard variants first, then custom).
AgeVariant detect_variant(const std::string& header_line);

void write_dataset_csv(std::ostream& out, const Dataset& dataset);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);

/// Full header (id,label,... feature columns) for a variant.
std::vector<std::string> dataset_header(const AgeVariant& variant);

}  // namespace dyscreen
