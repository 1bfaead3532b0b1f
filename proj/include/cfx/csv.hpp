#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cfx/weights.hpp"

namespace cfx {

// RFC 4180 records: comma separated, double-quoted fields may hold commas, quotes ("") and line
// breaks. CRLF and LF both end a record; a trailing line break does not add an empty record.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

// Dataset over the model's features. The first record is the header. Columns that match no
// feature are skipped and reported in `warnings`; features without a column are marked missing.
// Continuous cells are decimal reals, categorical cells must name a category. Throws ParseError.
Dataset parse_dataset_csv(std::string_view text, const FeatureList& features,
                          std::vector<std::string>* warnings = nullptr);

enum class WeightScheme { Uniform, Mad, Std };

WeightScheme parse_weight_scheme(std::string_view name);
std::string_view to_string(WeightScheme scheme);

// Uniform needs no data; the other schemes throw MissingColumn when `dataset` is null.
WeightVector compute_weights(WeightScheme scheme, const IndicatorRegistry& registry, const Dataset* dataset);

}  // namespace cfx
