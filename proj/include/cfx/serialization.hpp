#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cfx/encoder.hpp"
#include "cfx/models.hpp"

namespace cfx {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kModelSchema = "cfx-model/1";

// Model artifacts. Parsing validates the model; errors are ParseError or the validation codes.
Model parse_model(const Json& doc, const ValidationOptions& options = {});
Model parse_model_text(std::string_view text, const ValidationOptions& options = {});
Json model_to_json(const Model& model);

// Instances are flat objects: continuous features map to numbers, categorical ones to strings.
Instance parse_instance(const Json& doc, const FeatureList& features);
Json instance_to_json(const Instance& instance, const FeatureList& features);

// Conditions as request objects: {"feature", "op", ...} with op one of le, lt, ge, gt,
// in_interval (lo, hi, optional lo_closed / hi_closed), eq, ne (value), keep.
Condition parse_condition(const Json& doc);
Json condition_to_json(const Condition& condition);

// Command-line form: name=value, name!=value, name<=v, name<v, name>=v, name>v, name:lo..hi.
// Whether `=` means a category or a number is settled against the model's features.
Condition parse_fix(std::string_view text, const FeatureList& features);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace cfx
