#include "cfx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfx/error.hpp"

namespace cfx::oracle {

void for_each_cell_combination(const IndicatorRegistry& registry, std::uint64_t cap,
                               const std::function<void(std::span<const std::size_t>)>& fn) {
  const std::size_t nf = registry.features().size();
  std::uint64_t total = 1;
  for (std::size_t f = 0; f < nf; ++f) {
    const std::uint64_t c = registry.cell_count(f);
    if (total > cap / c) throw Error(ErrorCode::CapExceeded, "cell space exceeds the oracle cap");
    total *= c;
  }
  std::vector<std::size_t> cells(nf, 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    fn(cells);
    for (std::size_t k = nf; k-- > 0;) {
      if (++cells[k] < registry.cell_count(k)) break;
      cells[k] = 0;
    }
  }
}

std::vector<Assignment> enumerate_consistent(const IndicatorRegistry& registry, std::uint64_t cap) {
  std::vector<Assignment> out;
  for_each_cell_combination(registry, cap, [&](std::span<const std::size_t> cells) {
    out.push_back(registry.assignment_from_cells(cells));
  });
  return out;
}

std::int64_t weighted_distance(const IndicatorRegistry& registry, std::span<const std::uint8_t> from,
                               std::span<const std::uint8_t> to, const WeightVector& weights) {
  std::int64_t d = 0;
  for (VarId id = 0; id < registry.size(); ++id) {
    if (from[id] == to[id]) continue;
    const std::int64_t u = weight_units(weights.values.at(id));
    d += registry.at(id).kind == Indicator::Kind::Threshold ? 2 * u : u;
  }
  return d;
}

namespace {

bool interval_meets(const Interval& a, const Interval& b) { return !a.intersect(b).empty(); }

}  // namespace

bool cells_satisfy(const IndicatorRegistry& registry, std::span<const std::size_t> cells,
                   std::span<const Condition> conditions, const Instance& factual) {
  const FeatureList& features = registry.features();
  const auto factual_cells = registry.cells_of(factual);
  for (const auto& c : conditions) {
    auto f = find_feature(features, c.feature);
    if (!f) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + c.feature + "'");
    const std::size_t cell = cells[*f];
    switch (c.kind) {
      case Condition::Kind::Keep:
        if (cell != factual_cells[*f]) return false;
        break;
      case Condition::Kind::Interval:
        // All interval conditions on the feature at once: they must overlap inside the cell.
        if (!interval_meets(registry.cell_interval(*f, cell), condition_interval(features, *f, conditions))) {
          return false;
        }
        break;
      case Condition::Kind::Equals:
        if (features[*f].kind == FeatureKind::Continuous) {
          const double v = std::stod(c.category);
          if (!registry.cell_interval(*f, cell).contains(v)) return false;
        } else if (features[*f].categories.at(cell) != c.category) {
          return false;
        }
        break;
      case Condition::Kind::NotEquals:
        if (features[*f].categories.at(cell) == c.category) return false;
        break;
    }
  }
  return true;
}

CounterfactualOracle brute_counterfactual(const Model& model, const Instance& factual, const WeightVector& weights,
                                          int target, std::span<const Condition> conditions, std::uint64_t cap) {
  const IndicatorRegistry registry = build_registry(model);
  const Assignment origin = registry.indicators_of(factual);
  CounterfactualOracle out;
  out.objective_scaled = std::numeric_limits<std::int64_t>::max();
  for_each_cell_combination(registry, cap, [&](std::span<const std::size_t> cells) {
    if (evaluate(model, registry.representative(cells)) != target) return;
    if (!cells_satisfy(registry, cells, conditions, factual)) return;
    ++out.candidates;
    Assignment a = registry.assignment_from_cells(cells);
    const std::int64_t d = weighted_distance(registry, origin, a, weights);
    if (d < out.objective_scaled) {
      out.objective_scaled = d;
      out.argmin.clear();
    }
    if (d == out.objective_scaled) out.argmin.push_back(std::move(a));
  });
  out.feasible = out.candidates > 0;
  if (!out.feasible) out.objective_scaled = 0;
  return out;
}

PrimeImplicantOracle brute_pi(const Model& model, const Instance& factual, std::span<const std::string> keep,
                              std::uint64_t cap) {
  const IndicatorRegistry registry = build_registry(model);
  const FeatureList& features = registry.features();
  std::vector<bool> kept(features.size(), false);
  for (const auto& name : keep) {
    auto f = find_feature(features, name);
    if (!f) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + name + "'");
    kept[*f] = true;
  }
  const int label = evaluate(model, factual);
  const auto origin = registry.cells_of(factual);
  PrimeImplicantOracle out;
  bool any = false;
  for_each_cell_combination(registry, cap, [&](std::span<const std::size_t> cells) {
    std::vector<std::size_t> changed;
    for (std::size_t f = 0; f < features.size(); ++f) {
      const bool untested = registry.feature_vars(f).empty();
      if (kept[f] && cells[f] != origin[f]) return;
      if (untested ? !kept[f] : cells[f] != origin[f]) changed.push_back(f);
    }
    if (evaluate(model, registry.representative(cells)) != label) return;
    if (!any || changed.size() > out.max_changed) {
      out.max_changed = changed.size();
      out.witnesses.clear();
      any = true;
    }
    if (changed.size() == out.max_changed &&
        std::find(out.witnesses.begin(), out.witnesses.end(), changed) == out.witnesses.end()) {
      out.witnesses.push_back(std::move(changed));
    }
  });
  return out;
}

std::optional<Instance> universal_pi_counterexample(const Model& model, const Instance& factual,
                                                    std::span<const std::size_t> kept, std::uint64_t cap) {
  const IndicatorRegistry registry = build_registry(model);
  const auto origin = registry.cells_of(factual);
  const int label = evaluate(model, factual);
  std::vector<bool> is_kept(origin.size(), false);
  for (auto f : kept) is_kept.at(f) = true;
  std::optional<Instance> found;
  for_each_cell_combination(registry, cap, [&](std::span<const std::size_t> cells) {
    if (found) return;
    for (std::size_t f = 0; f < cells.size(); ++f) {
      if (is_kept[f] && cells[f] != origin[f]) return;
    }
    Instance x = registry.representative(cells);
    for (std::size_t f = 0; f < cells.size(); ++f) {
      if (is_kept[f]) x.values[f] = factual.values[f];
    }
    if (evaluate(model, x) != label) found = std::move(x);
  });
  return found;
}

std::optional<Instance> cell_invariance_violation(const Model& model, const IndicatorRegistry& registry,
                                                  std::span<const std::size_t> cells, std::mt19937_64& rng,
                                                  std::size_t samples) {
  const Instance rep = registry.representative(cells);
  const int label = evaluate(model, rep);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    Instance x = rep;
    for (std::size_t f = 0; f < cells.size(); ++f) {
      if (registry.features()[f].kind == FeatureKind::Categorical) continue;
      const Interval iv = registry.cell_interval(f, cells[f]);
      double v = rep.values[f].number;
      if (std::isfinite(iv.lo) && std::isfinite(iv.hi)) {
        v = iv.lo + (iv.hi - iv.lo) * unit(rng);
        if (s == 0) v = iv.hi;  // closed upper end
      } else if (std::isfinite(iv.lo)) {
        v = iv.lo + 1e-9 + 1e6 * unit(rng);
      } else if (std::isfinite(iv.hi)) {
        v = s == 0 ? iv.hi : iv.hi - 1e6 * unit(rng);
      } else {
        v = 1e6 * (unit(rng) - 0.5);
      }
      if (iv.contains(v)) x.values[f] = Value::of(v);
    }
    if (evaluate(model, x) != label) return x;
  }
  return std::nullopt;
}

}  // namespace cfx::oracle
