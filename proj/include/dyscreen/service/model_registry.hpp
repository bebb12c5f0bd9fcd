#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dyscreen/forest.hpp"

namespace dyscreen::service {

struct ModelEntry {
  std::string version;  ///< "sha256:<hex of the artifact bytes>"
  std::shared_ptr<const ForestModel> model;
};

/// Active model per live variant. Readers take a shared_ptr snapshot, so a swap never changes
/// the model an in-flight request already holds.
class ModelRegistry {
 public:
  /// Empty `data_dir` keeps everything in memory. Otherwise artifacts are stored under
  /// data_dir/models and the active set in data_dir/active.json, and both are reloaded here.
  explicit ModelRegistry(std::filesystem::path data_dir = {});

  /// Validates and activates an artifact for its variant. Throws ModelFormatError for bad bytes
  /// and ServiceError (variant_mismatch) for variants other than the three age ranges.
  /// On failure the previous model stays active.
  ModelEntry activate(std::string_view artifact);

  std::optional<ModelEntry> active(VariantName variant) const;
  /// Any model that was ever activated, by version id.
  std::optional<ModelEntry> find(const std::string& version) const;

  nlohmann::json describe_active() const;

  static std::string version_of(std::string_view artifact);

 private:
  ModelEntry load_entry(std::string_view artifact) const;
  void persist_active() const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<VariantName, ModelEntry> active_;
  std::map<std::string, ModelEntry> known_;
};

bool is_live_variant(const AgeVariant& variant);

}  // namespace dyscreen::service
