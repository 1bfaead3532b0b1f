#include "cfx/weights.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cfx/error.hpp"

namespace cfx {

std::int64_t weight_units(double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw Error(ErrorCode::MissingWeight, "weights must be finite and nonnegative");
  }
  if (weight == 0.0) return 0;
  auto units = static_cast<std::int64_t>(std::llround(weight * static_cast<double>(kWeightUnitsPerOne)));
  return std::max<std::int64_t>(units, 1);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double median_absolute_deviation(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double m = median({values.begin(), values.end()});
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::abs(v - m));
  return median(std::move(dev));
}

double sample_standard_deviation(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

WeightVector uniform_weights(const IndicatorRegistry& registry) {
  return WeightVector{std::vector<double>(registry.size(), 1.0)};
}

namespace {

std::optional<double> inverse(double spread) {
  if (!std::isfinite(spread) || spread <= 0.0) return std::nullopt;
  return 1.0 / spread;
}

void require_column(const Dataset& data, std::size_t feature) {
  if (feature >= data.present.size() || !data.present[feature]) {
    throw Error(ErrorCode::MissingColumn,
                "dataset has no column for feature '" + data.features[feature].name + "'");
  }
}

std::vector<double> indicator_column(const Dataset& data, std::size_t feature, std::size_t category) {
  std::vector<double> col;
  col.reserve(data.rows);
  for (std::size_t c : data.categorical[feature]) col.push_back(c == category ? 1.0 : 0.0);
  return col;
}

// Fills the weights of one feature, replacing degenerate entries by the largest finite one.
void assign_with_fallback(WeightVector& out, std::span<const VarId> vars,
                          const std::vector<std::optional<double>>& raw) {
  double fallback = 0.0;
  for (const auto& w : raw) {
    if (w) fallback = std::max(fallback, *w);
  }
  if (fallback == 0.0) fallback = 1.0;
  for (std::size_t i = 0; i < vars.size(); ++i) out.values[vars[i]] = raw[i].value_or(fallback);
}

template <typename ContinuousWeight>
WeightVector weights_by_feature(const IndicatorRegistry& registry, const Dataset& data,
                                ContinuousWeight&& continuous_weight) {
  WeightVector out{std::vector<double>(registry.size(), 1.0)};
  for (std::size_t f = 0; f < registry.features().size(); ++f) {
    auto vars = registry.feature_vars(f);
    if (vars.empty()) continue;
    require_column(data, f);
    std::vector<std::optional<double>> raw;
    for (VarId id : vars) {
      const Indicator& e = registry.at(id);
      if (e.kind == Indicator::Kind::Category) {
        raw.push_back(inverse(sample_standard_deviation(indicator_column(data, f, e.category))));
      } else {
        raw.push_back(continuous_weight(data.numeric[f], e.threshold));
      }
    }
    assign_with_fallback(out, vars, raw);
  }
  return out;
}

}  // namespace

WeightVector mad_rule_weights(const IndicatorRegistry& registry, const Dataset& dataset) {
  return weights_by_feature(registry, dataset, [](const std::vector<double>& column, double threshold) {
    std::vector<double> subset;
    for (double v : column) {
      if (v <= threshold) subset.push_back(v);
    }
    if (subset.empty()) return std::optional<double>{};
    return inverse(median_absolute_deviation(subset));
  });
}

WeightVector std_weights(const IndicatorRegistry& registry, const Dataset& dataset) {
  return weights_by_feature(registry, dataset, [](const std::vector<double>& column, double) {
    return inverse(sample_standard_deviation(column));
  });
}

}  // namespace cfx
