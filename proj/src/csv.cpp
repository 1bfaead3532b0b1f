#include "cfx/csv.hpp"

#include <charconv>
#include <cmath>

#include "cfx/error.hpp"

namespace cfx {

namespace {

[[noreturn]] void csv_error(const std::string& what) { throw Error(ErrorCode::ParseError, "csv: " + what); }

}  // namespace

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;       // inside a quoted field
  bool was_quoted = false;   // current field started with a quote
  bool pending = false;      // something was read since the last record break
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    pending = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) csv_error("stray quote on line " + std::to_string(line));
        quoted = was_quoted = pending = true;
        break;
      case ',':
        end_field();
        pending = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (was_quoted) csv_error("text after closing quote on line " + std::to_string(line));
        field.push_back(c);
        pending = true;
    }
  }
  if (quoted) csv_error("unterminated quoted field");
  if (pending) end_record();
  return records;
}

namespace {

double parse_real(const std::string& cell, std::size_t row, const std::string& column) {
  std::string_view s(cell);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    csv_error("row " + std::to_string(row) + ", column '" + column + "': '" + cell + "' is not a real number");
  }
  return v;
}

}  // namespace

Dataset parse_dataset_csv(std::string_view text, const FeatureList& features, std::vector<std::string>* warnings) {
  auto records = parse_csv_records(text);
  if (records.empty()) csv_error("missing header row");
  const auto& header = records.front();
  Dataset data;
  data.features = features;
  data.present.assign(features.size(), false);
  data.numeric.resize(features.size());
  data.categorical.resize(features.size());
  std::vector<std::optional<std::size_t>> column_feature(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto f = find_feature(features, header[c]);
    if (!f) {
      if (warnings) warnings->push_back("ignoring unknown column '" + header[c] + "'");
      continue;
    }
    if (data.present[*f]) csv_error("duplicate column '" + header[c] + "'");
    data.present[*f] = true;
    column_feature[c] = *f;
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      csv_error("row " + std::to_string(r) + " has " + std::to_string(rec.size()) + " fields, expected " +
                std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < rec.size(); ++c) {
      if (!column_feature[c]) continue;
      const std::size_t f = *column_feature[c];
      if (features[f].kind == FeatureKind::Continuous) {
        data.numeric[f].push_back(parse_real(rec[c], r, header[c]));
      } else {
        auto cat = find_category(features[f], rec[c]);
        if (!cat) csv_error("row " + std::to_string(r) + ": '" + rec[c] + "' is not a category of '" + header[c] + "'");
        data.categorical[f].push_back(*cat);
      }
    }
    ++data.rows;
  }
  return data;
}

WeightScheme parse_weight_scheme(std::string_view name) {
  if (name == "uniform") return WeightScheme::Uniform;
  if (name == "mad") return WeightScheme::Mad;
  if (name == "std") return WeightScheme::Std;
  throw Error(ErrorCode::InvalidCondition, "unknown weight scheme '" + std::string(name) + "'");
}

std::string_view to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Uniform: return "uniform";
    case WeightScheme::Mad: return "mad";
    case WeightScheme::Std: return "std";
  }
  return "uniform";
}

WeightVector compute_weights(WeightScheme scheme, const IndicatorRegistry& registry, const Dataset* dataset) {
  if (scheme == WeightScheme::Uniform) return uniform_weights(registry);
  if (!dataset) {
    throw Error(ErrorCode::MissingColumn, "weight scheme '" + std::string(to_string(scheme)) + "' needs a dataset");
  }
  return scheme == WeightScheme::Mad ? mad_rule_weights(registry, *dataset) : std_weights(registry, *dataset);
}

}  // namespace cfx
