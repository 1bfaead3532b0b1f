#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfx/models.hpp"

namespace cfx {

using VarId = std::uint32_t;
// One 0/1 value per registry indicator.
using Assignment = std::vector<std::uint8_t>;

struct Indicator {
  enum class Kind { Threshold, Category };

  Kind kind = Kind::Threshold;
  std::size_t feature = 0;
  double threshold = 0.0;    // Threshold: indicator of X <= threshold
  std::size_t category = 0;  // Category: one-hot indicator of X == category

  bool operator==(const Indicator&) const = default;
};

// Half-open interval (lo, hi] with optional closed lower end; infinities allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = true;

  bool empty() const;
  bool contains(double x) const;
  Interval intersect(const Interval& other) const;

  bool operator==(const Interval&) const = default;
};

// Every binary indicator the encoding talks about, ordered by feature, then by ascending
// threshold (continuous) or category order (categorical). Thresholds are distinct within a
// feature, so each continuous feature with q thresholds splits the line into q + 1 cells:
// cell j is (t_j, t_{j+1}] with t_0 = -inf and t_{q+1} = +inf, and i[X <= t_k] = 1 iff k >= j.
class IndicatorRegistry {
 public:
  IndicatorRegistry() = default;
  // thresholds[f] lists the thresholds of continuous feature f (any order, duplicates allowed).
  // Every categorical feature receives a one-hot group.
  IndicatorRegistry(FeatureList features, const std::vector<std::vector<double>>& thresholds);

  const FeatureList& features() const { return features_; }
  std::size_t size() const { return entries_.size(); }
  const Indicator& at(VarId id) const { return entries_[id]; }
  const std::vector<Indicator>& entries() const { return entries_; }

  // Thresholds ascending (continuous) or one var per category (categorical).
  std::span<const VarId> feature_vars(std::size_t feature) const { return feature_vars_[feature]; }
  std::vector<double> thresholds(std::size_t feature) const;

  std::optional<VarId> threshold_var(std::size_t feature, double threshold) const;
  std::optional<VarId> category_var(std::size_t feature, std::size_t category) const;
  std::optional<VarId> var_for(const Predicate& predicate) const;

  std::string label(VarId id) const;

  // Number of cells of a feature: q + 1 for continuous, |categories| for categorical.
  std::size_t cell_count(std::size_t feature) const;
  std::size_t cell_of(std::size_t feature, const Value& value) const;
  Interval cell_interval(std::size_t feature, std::size_t cell) const;

  // A point inside the cell: the midpoint of a bounded cell, the finite bound -/+ 1 otherwise, 0
  // for a feature without thresholds.
  Value representative(std::size_t feature, std::size_t cell) const;
  Instance representative(std::span<const std::size_t> cells) const;

  // One cell index per feature.
  std::vector<std::size_t> cells_of(const Instance& instance) const;
  Assignment assignment_from_cells(std::span<const std::size_t> cells) const;
  // nullopt iff the assignment is not realizable by any instance.
  std::optional<std::vector<std::size_t>> cells_from_assignment(std::span<const std::uint8_t> a) const;
  bool is_consistent(std::span<const std::uint8_t> a) const { return cells_from_assignment(a).has_value(); }

  Assignment indicators_of(const Instance& instance) const;

  // Product of cell counts, saturating at SIZE_MAX.
  std::size_t space_size() const;

  bool operator==(const IndicatorRegistry&) const = default;

 private:
  FeatureList features_;
  std::vector<Indicator> entries_;
  std::vector<std::vector<VarId>> feature_vars_;
};

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

// All predicates of the model, deduplicated per feature.
IndicatorRegistry build_registry(const Model& model);
IndicatorRegistry build_registry(const FeatureList& features, std::span<const DecisionTree> trees);

}  // namespace cfx
