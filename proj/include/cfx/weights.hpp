#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cfx/registry.hpp"

namespace cfx {

// Nonnegative weight per registry indicator.
struct WeightVector {
  std::vector<double> values;

  bool operator==(const WeightVector&) const = default;
};

// Column store over a model's features. Columns absent from the source are marked missing.
struct Dataset {
  FeatureList features;
  std::size_t rows = 0;
  std::vector<bool> present;
  std::vector<std::vector<double>> numeric;           // continuous columns
  std::vector<std::vector<std::size_t>> categorical;  // categorical columns (category index)
};

// Weights enter the exact objective as integers in units of 1e-6; positive weights never round
// to zero.
inline constexpr std::int64_t kWeightUnitsPerOne = 1'000'000;
std::int64_t weight_units(double weight);

double median(std::vector<double> values);
// Median absolute deviation around the median.
double median_absolute_deviation(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_standard_deviation(std::span<const double> values);

WeightVector uniform_weights(const IndicatorRegistry& registry);

// Rule X <= a gets 1 / MAD over the rows with X <= a. One-hot indicators get the inverse
// standard deviation of their 0/1 column. Degenerate cases (empty subset, zero spread) fall back
// to the largest finite weight on the same feature, else 1.
WeightVector mad_rule_weights(const IndicatorRegistry& registry, const Dataset& dataset);

// Inverse sample standard deviation of the underlying column, shared by all rules on a feature.
WeightVector std_weights(const IndicatorRegistry& registry, const Dataset& dataset);

}  // namespace cfx
