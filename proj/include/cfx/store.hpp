#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cfx/csv.hpp"
#include "cfx/models.hpp"

namespace cfx {

struct StoredModel {
  std::string id;  // SHA-256 of the artifact bytes
  std::string type;
  std::filesystem::path artifact;
  std::optional<std::string> dataset;
  std::string created_at;  // UTC, ISO 8601
};

// Flat directory: <id>.json holds the artifact, <id>.meta.json its metadata, datasets/<id>.csv
// the uploaded CSV files. Files are written atomically and never rewritten, so readers need no
// lock; the mutex only orders concurrent first uploads of the same id.
class ModelStore {
 public:
  explicit ModelStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  // Validates the artifact and stores it. Identical bytes map to the same id; a second upload
  // keeps the original metadata. Throws UnknownFeature-style validation errors or IoError.
  StoredModel put_model(std::string_view artifact, const std::optional<std::string>& dataset = std::nullopt);
  std::optional<StoredModel> find(const std::string& id) const;
  std::vector<StoredModel> list() const;
  Model load(const StoredModel& entry) const;
  std::string artifact_bytes(const StoredModel& entry) const;

  std::string put_dataset(std::string_view csv);
  std::optional<std::string> dataset_bytes(const std::string& id) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

// 64 lowercase hex digits.
bool is_content_id(std::string_view id);

}  // namespace cfx
