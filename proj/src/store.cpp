#include "cfx/store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "cfx/error.hpp"
#include "cfx/explanation.hpp"
#include "cfx/serialization.hpp"

namespace cfx {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

bool is_content_id(std::string_view id) {
  return id.size() == 64 &&
         std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

ModelStore::ModelStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "datasets", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create model directory '" + dir_.string() + "'");
}

StoredModel ModelStore::put_model(std::string_view artifact, const std::optional<std::string>& dataset) {
  const Model model = parse_model_text(artifact);
  if (dataset && !dataset_bytes(*dataset)) throw Error(ErrorCode::IoError, "unknown dataset '" + *dataset + "'");
  const std::string id = content_hash(artifact);
  std::lock_guard lock(mutex_);
  if (auto existing = find(id)) return *existing;
  StoredModel entry{id, std::string(model_type_name(model)), dir_ / (id + ".json"), dataset, utc_now()};
  write_file_atomic(entry.artifact, artifact);
  Json meta = Json::object();
  meta["id"] = id;
  meta["type"] = entry.type;
  meta["dataset"] = dataset ? Json(*dataset) : Json(nullptr);
  meta["created_at"] = entry.created_at;
  // The metadata goes last; an entry is visible once it exists.
  write_file_atomic(dir_ / (id + ".meta.json"), meta.dump(2) + "\n");
  return entry;
}

std::optional<StoredModel> ModelStore::find(const std::string& id) const {
  if (!is_content_id(id)) return std::nullopt;
  const fs::path meta_path = dir_ / (id + ".meta.json");
  std::error_code ec;
  if (!fs::exists(meta_path, ec)) return std::nullopt;
  try {
    const Json meta = Json::parse(read_file(meta_path));
    StoredModel entry;
    entry.id = id;
    entry.type = meta.at("type").get<std::string>();
    entry.artifact = dir_ / (id + ".json");
    if (!meta.at("dataset").is_null()) entry.dataset = meta["dataset"].get<std::string>();
    entry.created_at = meta.at("created_at").get<std::string>();
    return entry;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IoError, "corrupt metadata for model " + id);
  }
}

std::vector<StoredModel> ModelStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".meta.json";
    if (name.size() == 64 + suffix.size() && name.ends_with(suffix)) ids.push_back(name.substr(0, 64));
  }
  std::sort(ids.begin(), ids.end());
  std::vector<StoredModel> out;
  for (const auto& id : ids) {
    if (auto m = find(id)) out.push_back(std::move(*m));
  }
  return out;
}

std::string ModelStore::artifact_bytes(const StoredModel& entry) const { return read_file(entry.artifact); }

Model ModelStore::load(const StoredModel& entry) const { return parse_model_text(artifact_bytes(entry)); }

std::string ModelStore::put_dataset(std::string_view csv) {
  parse_csv_records(csv);  // reject malformed files early
  const std::string id = content_hash(csv);
  const fs::path path = dir_ / "datasets" / (id + ".csv");
  std::lock_guard lock(mutex_);
  std::error_code ec;
  if (!fs::exists(path, ec)) write_file_atomic(path, csv);
  return id;
}

std::optional<std::string> ModelStore::dataset_bytes(const std::string& id) const {
  if (!is_content_id(id)) return std::nullopt;
  const fs::path path = dir_ / "datasets" / (id + ".csv");
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  return read_file(path);
}

}  // namespace cfx
