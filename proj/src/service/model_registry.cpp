#include "dyscreen/service/model_registry.hpp"

#include "dyscreen/error.hpp"
#include "dyscreen/model_io.hpp"
#include "dyscreen/service/errors.hpp"
#include "dyscreen/service/storage.hpp"

namespace dyscreen::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kVersionPrefix = "sha256:";

fs::path artifact_path(const fs::path& dir, const std::string& version) {
  return dir / "models" / (version.substr(kVersionPrefix.size()) + ".json");
}

}  // namespace

bool is_live_variant(const AgeVariant& variant) {
  switch (variant.name()) {
    case VariantName::Young7_8:
    case VariantName::Mid9_11:
    case VariantName::Teen12_17:
      return true;
    default:
      return false;
  }
}

std::string ModelRegistry::version_of(std::string_view artifact) {
  return std::string(kVersionPrefix) + sha256_hex(artifact);
}

ModelRegistry::ModelRegistry(fs::path data_dir) : dir_(std::move(data_dir)) {
  if (dir_.empty()) return;
  fs::create_directories(dir_ / "models");
  for (const auto& file : fs::directory_iterator(dir_ / "models")) {
    if (file.path().extension() != ".json") continue;
    auto entry = load_entry(read_file(file.path()));
    known_.emplace(entry.version, std::move(entry));
  }
  const auto active_file = dir_ / "active.json";
  if (!fs::exists(active_file)) return;
  const auto doc = json::parse(read_file(active_file));
  for (const auto& [label, version] : doc.items()) {
    const auto it = known_.find(version.get<std::string>());
    if (it == known_.end()) throw ModelFormatError("active.json names unknown model " + version.get<std::string>());
    active_[AgeVariant::parse(label).name()] = it->second;
  }
}

ModelEntry ModelRegistry::load_entry(std::string_view artifact) const {
  auto model = std::make_shared<ForestModel>(deserialize_model(artifact));
  if (!is_live_variant(model->variant))
    throw ServiceError(400, "variant_mismatch",
                       "model variant " + model->variant.label() + " is not one of young7_8, mid9_11, teen12_17",
                       {{"variant", model->variant.label()}});
  return {version_of(artifact), std::move(model)};
}

ModelEntry ModelRegistry::activate(std::string_view artifact) {
  auto entry = load_entry(artifact);
  std::lock_guard lock(mutex_);
  if (!dir_.empty()) {
    const auto path = artifact_path(dir_, entry.version);
    if (!fs::exists(path)) write_file_atomic(path, artifact);
  }
  if (auto it = known_.find(entry.version); it != known_.end()) entry = it->second;
  else known_.emplace(entry.version, entry);

  const auto name = entry.model->variant.name();
  const auto previous = active_.find(name);
  std::optional<ModelEntry> saved;
  if (previous != active_.end()) saved = previous->second;
  active_[name] = entry;
  try {
    persist_active();
  } catch (...) {
    if (saved) active_[name] = *saved;
    else active_.erase(name);
    throw;
  }
  return entry;
}

void ModelRegistry::persist_active() const {
  if (dir_.empty()) return;
  json doc = json::object();
  for (const auto& [name, entry] : active_) doc[entry.model->variant.label()] = entry.version;
  write_file_atomic(dir_ / "active.json", doc.dump(2));
}

std::optional<ModelEntry> ModelRegistry::active(VariantName variant) const {
  std::lock_guard lock(mutex_);
  const auto it = active_.find(variant);
  if (it == active_.end()) return std::nullopt;
  return it->second;
}

std::optional<ModelEntry> ModelRegistry::find(const std::string& version) const {
  std::lock_guard lock(mutex_);
  const auto it = known_.find(version);
  if (it == known_.end()) return std::nullopt;
  return it->second;
}

json ModelRegistry::describe_active() const {
  std::lock_guard lock(mutex_);
  json out = json::object();
  for (auto name : {VariantName::Young7_8, VariantName::Mid9_11, VariantName::Teen12_17}) {
    const auto label = AgeVariant::standard(name).label();
    const auto it = active_.find(name);
    if (it == active_.end()) {
      out[label] = nullptr;
      continue;
    }
    const auto& m = *it->second.model;
    out[label] = {{"version", it->second.version},
                  {"threshold", m.threshold},
                  {"n_trees", m.trees.size()},
                  {"feature_count", m.variant.feature_count()}};
  }
  return out;
}

}  // namespace dyscreen::service
