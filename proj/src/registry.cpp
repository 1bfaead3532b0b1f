#include "cfx/registry.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

#include "cfx/error.hpp"

namespace cfx {

bool Interval::empty() const {
  if (lo < hi) return false;
  if (lo > hi) return true;
  return !(lo_closed && hi_closed) || std::isinf(lo);
}

bool Interval::contains(double x) const {
  bool above = lo_closed ? x >= lo : x > lo;
  bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

Interval Interval::intersect(const Interval& other) const {
  Interval out = *this;
  if (other.lo > out.lo || (other.lo == out.lo && !other.lo_closed)) {
    out.lo = other.lo;
    out.lo_closed = other.lo_closed;
  }
  if (other.hi < out.hi || (other.hi == out.hi && !other.hi_closed)) {
    out.hi = other.hi;
    out.hi_closed = other.hi_closed;
  }
  return out;
}

IndicatorRegistry::IndicatorRegistry(FeatureList features,
                                     const std::vector<std::vector<double>>& thresholds)
    : features_(std::move(features)), feature_vars_(features_.size()) {
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const Feature& feature = features_[f];
    if (feature.kind == FeatureKind::Categorical) {
      for (std::size_t c = 0; c < feature.categories.size(); ++c) {
        feature_vars_[f].push_back(static_cast<VarId>(entries_.size()));
        entries_.push_back({Indicator::Kind::Category, f, 0.0, c});
      }
      continue;
    }
    if (f >= thresholds.size()) continue;
    std::vector<double> ts = thresholds[f];
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (double t : ts) {
      feature_vars_[f].push_back(static_cast<VarId>(entries_.size()));
      entries_.push_back({Indicator::Kind::Threshold, f, t, 0});
    }
  }
}

std::vector<double> IndicatorRegistry::thresholds(std::size_t feature) const {
  std::vector<double> out;
  if (features_[feature].kind != FeatureKind::Continuous) return out;
  for (VarId id : feature_vars_[feature]) out.push_back(entries_[id].threshold);
  return out;
}

std::optional<VarId> IndicatorRegistry::threshold_var(std::size_t feature, double threshold) const {
  if (feature >= features_.size() || features_[feature].kind != FeatureKind::Continuous) {
    return std::nullopt;
  }
  const auto& vars = feature_vars_[feature];
  auto it = std::lower_bound(vars.begin(), vars.end(), threshold,
                             [&](VarId id, double t) { return entries_[id].threshold < t; });
  if (it != vars.end() && entries_[*it].threshold == threshold) return *it;
  return std::nullopt;
}

std::optional<VarId> IndicatorRegistry::category_var(std::size_t feature, std::size_t category) const {
  if (feature >= features_.size() || features_[feature].kind != FeatureKind::Categorical ||
      category >= feature_vars_[feature].size()) {
    return std::nullopt;
  }
  return feature_vars_[feature][category];
}

std::optional<VarId> IndicatorRegistry::var_for(const Predicate& predicate) const {
  if (predicate.test == Predicate::Test::Threshold) {
    return threshold_var(predicate.feature, predicate.threshold);
  }
  return category_var(predicate.feature, predicate.category);
}

std::string IndicatorRegistry::label(VarId id) const {
  const Indicator& e = entries_[id];
  const Feature& f = features_[e.feature];
  if (e.kind == Indicator::Kind::Threshold) return f.name + "<=" + format_number(e.threshold);
  return f.name + "=" + f.categories[e.category];
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::size_t IndicatorRegistry::cell_count(std::size_t feature) const {
  if (features_[feature].kind == FeatureKind::Categorical) return features_[feature].categories.size();
  return feature_vars_[feature].size() + 1;
}

std::size_t IndicatorRegistry::cell_of(std::size_t feature, const Value& value) const {
  if (features_[feature].kind == FeatureKind::Categorical) return value.category;
  // Number of thresholds strictly below the value.
  std::size_t j = 0;
  for (VarId id : feature_vars_[feature]) {
    if (entries_[id].threshold < value.number) ++j;
  }
  return j;
}

Interval IndicatorRegistry::cell_interval(std::size_t feature, std::size_t cell) const {
  const auto& vars = feature_vars_[feature];
  Interval out;
  if (cell > 0) out.lo = entries_[vars[cell - 1]].threshold;
  if (cell < vars.size()) out.hi = entries_[vars[cell]].threshold;
  out.hi_closed = cell < vars.size();
  return out;
}

Value IndicatorRegistry::representative(std::size_t feature, std::size_t cell) const {
  if (features_[feature].kind == FeatureKind::Categorical) return Value::of_category(cell);
  Interval iv = cell_interval(feature, cell);
  const bool has_lo = std::isfinite(iv.lo), has_hi = std::isfinite(iv.hi);
  if (has_lo && has_hi) {
    double mid = iv.lo + (iv.hi - iv.lo) / 2.0;
    return Value::of(mid > iv.lo ? mid : iv.hi);  // adjacent doubles: the closed upper end
  }
  if (has_lo) return Value::of(iv.lo + 1.0);
  if (has_hi) return Value::of(iv.hi - 1.0);
  return Value::of(0.0);
}

Instance IndicatorRegistry::representative(std::span<const std::size_t> cells) const {
  Instance out;
  out.values.reserve(features_.size());
  for (std::size_t f = 0; f < features_.size(); ++f) out.values.push_back(representative(f, cells[f]));
  return out;
}

std::vector<std::size_t> IndicatorRegistry::cells_of(const Instance& instance) const {
  std::vector<std::size_t> cells(features_.size());
  for (std::size_t f = 0; f < features_.size(); ++f) cells[f] = cell_of(f, instance.values[f]);
  return cells;
}

Assignment IndicatorRegistry::assignment_from_cells(std::span<const std::size_t> cells) const {
  Assignment a(entries_.size(), 0);
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& vars = feature_vars_[f];
    if (features_[f].kind == FeatureKind::Categorical) {
      a[vars[cells[f]]] = 1;
    } else {
      for (std::size_t k = cells[f]; k < vars.size(); ++k) a[vars[k]] = 1;
    }
  }
  return a;
}

std::optional<std::vector<std::size_t>> IndicatorRegistry::cells_from_assignment(
    std::span<const std::uint8_t> a) const {
  if (a.size() != entries_.size()) {
    throw Error(ErrorCode::InconsistentAssignment, "assignment does not cover the registry");
  }
  std::vector<std::size_t> cells(features_.size(), 0);
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& vars = feature_vars_[f];
    if (features_[f].kind == FeatureKind::Categorical) {
      std::size_t ones = 0;
      for (std::size_t c = 0; c < vars.size(); ++c) {
        if (a[vars[c]]) {
          ++ones;
          cells[f] = c;
        }
      }
      if (ones != 1) return std::nullopt;
      continue;
    }
    // Monotone: a run of zeros followed by a run of ones.
    std::size_t k = 0;
    while (k < vars.size() && !a[vars[k]]) ++k;
    cells[f] = k;
    for (; k < vars.size(); ++k) {
      if (!a[vars[k]]) return std::nullopt;
    }
  }
  return cells;
}

Assignment IndicatorRegistry::indicators_of(const Instance& instance) const {
  return assignment_from_cells(cells_of(instance));
}

std::size_t IndicatorRegistry::space_size() const {
  std::size_t total = 1;
  for (std::size_t f = 0; f < features_.size(); ++f) {
    std::size_t c = cell_count(f);
    if (total > std::numeric_limits<std::size_t>::max() / c) return std::numeric_limits<std::size_t>::max();
    total *= c;
  }
  return total;
}

IndicatorRegistry build_registry(const FeatureList& features, std::span<const DecisionTree> trees) {
  std::vector<std::vector<double>> thresholds(features.size());
  for (const auto& tree : trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf && node.predicate.test == Predicate::Test::Threshold) {
        thresholds[node.predicate.feature].push_back(node.predicate.threshold);
      }
    }
  }
  return IndicatorRegistry(features, thresholds);
}

IndicatorRegistry build_registry(const Model& model) {
  if (const auto* dt = std::get_if<DecisionTreeModel>(&model)) {
    return build_registry(dt->features, std::span<const DecisionTree>(&dt->tree, 1));
  }
  if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
    return build_registry(rf->features, rf->trees);
  }
  return IndicatorRegistry(std::get<NaiveBayesModel>(model).features, {});
}

}  // namespace cfx
