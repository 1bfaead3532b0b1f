#include "cfx/solver.hpp"

#include <algorithm>
#include <limits>

#include "cfx/error.hpp"

namespace cfx {

SolverConfig SolverConfig::with_time_limit(double seconds) {
  SolverConfig c;
  c.deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
  return c;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::CapExceeded: return "cap_exceeded";
  }
  return "unknown";
}

LinearConstraint no_good_cut(const IlpProblem& problem, std::span<const std::uint8_t> assignment) {
  LinearConstraint cut{{}, Relation::GreaterEqual, 1, ConstraintFamily::NoGood};
  for (VarId v = 0; v < problem.size(); ++v) {
    if (problem.variables[v].kind != VarKind::Indicator) continue;
    if (assignment[v]) {
      cut.terms.emplace_back(v, -1);
      --cut.rhs;
    } else {
      cut.terms.emplace_back(v, 1);
    }
  }
  return cut;
}

namespace {

constexpr std::int64_t kNoBound = std::numeric_limits<std::int64_t>::max() / 4;

struct CapReached {};

// Rows are kept as sum(a * x) <= rhs. Costs are in minimization form. Every free variable has a
// preferred value (the cheaper one, or the hint on ties); the preferred completion of a node sets
// every free variable to it. Its cost is the node's trivial bound, and the rows it violates drive
// both the bound and the branching.
class Engine {
 public:
  Engine(const IlpProblem& problem, const SolverConfig& config) : config_(config) {
    const std::size_t n = problem.size();
    const bool maximize = problem.sense == Sense::Maximize;
    cost_.assign(n, 0);
    for (std::size_t v = 0; v < n && v < problem.objective.coefficients.size(); ++v) {
      cost_[v] = maximize ? -problem.objective.coefficients[v] : problem.objective.coefficients[v];
    }
    constant_ = maximize ? -problem.objective.constant : problem.objective.constant;
    pref_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      pref_[v] = cost_[v] < 0 ? 1 : cost_[v] > 0 ? 0 : (problem.variables[v].hint ? 1 : 0);
    }
    cols_.resize(n);
    dominant_.resize(n);
    for (const auto& c : problem.constraints) {
      if (c.relation != Relation::GreaterEqual) add_row(c.terms, c.rhs, false);
      if (c.relation != Relation::LessEqual) add_row(c.terms, c.rhs, true);
    }
    root_fixed_ = problem.fixed;
    by_cost_.reserve(n);
    for (VarId v = 0; v < n; ++v) {
      if (cost_[v] != 0) by_cost_.push_back(v);
    }
    std::stable_sort(by_cost_.begin(), by_cost_.end(),
                     [&](VarId a, VarId b) { return std::abs(cost_[a]) > std::abs(cost_[b]); });
  }

  void add_cut(const LinearConstraint& c) {
    if (c.relation != Relation::GreaterEqual) add_row(c.terms, c.rhs, false);
    if (c.relation != Relation::LessEqual) add_row(c.terms, c.rhs, true);
  }

  std::uint64_t nodes() const { return nodes_; }
  // Node cap counts from here.
  void start_budget() { budget_start_ = nodes_; }

  // Best assignment with minimization cost <= limit, or any such assignment when first_only.
  // Extra fixes are applied on top of the problem's own. Throws CapReached.
  std::optional<std::vector<std::uint8_t>> run(std::int64_t limit, bool first_only,
                                               std::span<const std::pair<VarId, std::uint8_t>> extra) {
    reset();
    limit_ = limit;
    first_only_ = first_only;
    best_.reset();
    next_limit_ = kNoBound;
    bool ok = true;
    for (VarId v = 0; v < root_fixed_.size() && ok; ++v) {
      if (root_fixed_[v] >= 0) ok = assign_checked(v, static_cast<std::uint8_t>(root_fixed_[v]));
    }
    for (const auto& [v, x] : extra) {
      if (!ok) break;
      ok = assign_checked(v, x);
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) enqueue(r);
    if (ok) search();
    return best_;
  }

  std::int64_t cost_of(std::span<const std::uint8_t> x) const {
    std::int64_t s = constant_;
    for (std::size_t v = 0; v < x.size(); ++v) s += x[v] ? cost_[v] : 0;
    return s;
  }

  std::uint8_t preferred(VarId v) const { return pref_[v]; }
  std::int64_t next_limit() const { return next_limit_; }

 private:
  struct Row {
    std::vector<std::pair<VarId, std::int64_t>> terms;
    std::int64_t rhs = 0;
    std::int64_t maxabs = 0;
  };

  void add_row(const std::vector<std::pair<VarId, std::int64_t>>& terms, std::int64_t rhs, bool negate) {
    Row row;
    row.rhs = negate ? -rhs : rhs;
    for (auto [v, a] : terms) {
      if (a == 0) continue;
      row.terms.emplace_back(v, negate ? -a : a);
      row.maxabs = std::max(row.maxabs, std::abs(a));
    }
    const auto id = static_cast<std::uint32_t>(rows_.size());
    if (cols_.size() < pref_.size()) cols_.resize(pref_.size());
    if (dominant_.size() < pref_.size()) dominant_.resize(pref_.size());
    for (auto [v, a] : row.terms) {
      cols_[v].emplace_back(id, a);
      if (std::abs(a) == row.maxabs) dominant_[v].emplace_back(id, a);
    }
    rows_.push_back(std::move(row));
  }

  void reset() {
    const std::size_t n = pref_.size(), m = rows_.size();
    if (cols_.size() < n) cols_.resize(n);
    val_.assign(n, -1);
    trail_.clear();
    minact_.assign(m, 0);
    actp_.assign(m, 0);
    for (std::size_t r = 0; r < m; ++r) {
      for (auto [v, a] : rows_[r].terms) {
        minact_[r] += std::min<std::int64_t>(a, 0);
        actp_[r] += pref_[v] ? a : 0;
      }
    }
    vpos_.assign(m, -1);
    violated_.clear();
    for (std::size_t r = 0; r < m; ++r) update_violation(r);
    queued_.assign(m, 0);
    queue_.clear();
    costp_ = constant_;
    for (std::size_t v = 0; v < n; ++v) costp_ += pref_[v] ? cost_[v] : 0;
    mark_.assign(n, 0);
    stamp_ = 0;
    induced_.assign(n, 0);
  }

  std::uint32_t next_stamp() {
    if (++stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 1;
    }
    return stamp_;
  }

  // Cost of moving v off its preferred value plus the costs of the variables that rows where v
  // carries the largest coefficient would then force off theirs. A lower bound on the extra cost
  // of any completion with v switched.
  std::int64_t switch_cost(VarId v) {
    const std::uint8_t x = 1 - pref_[v];
    std::int64_t total = std::abs(cost_[v]);
    const std::uint32_t st = next_stamp();
    mark_[v] = st;
    for (auto [r, a] : dominant_[v]) {
      const std::int64_t delta = (x ? a : 0) - std::min<std::int64_t>(a, 0);
      if (delta == 0) continue;
      const std::int64_t slack = rows_[r].rhs - minact_[r] - delta;
      if (slack < 0) return kNoBound;
      for (auto [w, b] : rows_[r].terms) {
        if (val_[w] >= 0 || mark_[w] == st || std::abs(b) <= slack) continue;
        mark_[w] = st;
        const std::uint8_t forced = b > 0 ? 0 : 1;
        if (forced != pref_[w]) total += std::abs(cost_[w]);
      }
    }
    return total;
  }

  // Fixes free variables whose switch cost alone breaks the limit, to fixpoint with propagation.
  // Leaves induced_ current for the bound. False on conflict.
  bool propagate_and_probe() {
    while (true) {
      if (!propagate()) return false;
      bool changed = false;
      const std::int64_t slack = limit_ - costp_;
      for (VarId v = 0; v < pref_.size(); ++v) {
        if (val_[v] >= 0) continue;
        const std::int64_t c = switch_cost(v);
        induced_[v] = c;
        if (c > slack) {
          exclude(c >= kNoBound ? kNoBound : costp_ + c);
          assign(v, pref_[v]);
          changed = true;
        }
      }
      if (!changed) return true;
    }
  }

  void update_violation(std::size_t r) {
    const bool bad = actp_[r] > rows_[r].rhs;
    if (bad && vpos_[r] < 0) {
      vpos_[r] = static_cast<std::int32_t>(violated_.size());
      violated_.push_back(static_cast<std::uint32_t>(r));
    } else if (!bad && vpos_[r] >= 0) {
      auto last = violated_.back();
      violated_[vpos_[r]] = last;
      vpos_[last] = vpos_[r];
      violated_.pop_back();
      vpos_[r] = -1;
    }
  }

  void enqueue(std::size_t r) {
    if (!queued_[r]) {
      queued_[r] = 1;
      queue_.push_back(static_cast<std::uint32_t>(r));
    }
  }

  void assign(VarId v, std::uint8_t x) {
    val_[v] = static_cast<std::int8_t>(x);
    trail_.push_back(v);
    const bool moved = x != pref_[v];
    if (moved) costp_ += x ? cost_[v] : -cost_[v];
    for (auto [r, a] : cols_[v]) {
      minact_[r] += (x ? a : 0) - std::min<std::int64_t>(a, 0);
      if (moved) {
        actp_[r] += x ? a : -a;
        update_violation(r);
      }
      enqueue(r);
    }
  }

  void unassign_to(std::size_t mark) {
    while (trail_.size() > mark) {
      VarId v = trail_.back();
      trail_.pop_back();
      const auto x = static_cast<std::uint8_t>(val_[v]);
      const bool moved = x != pref_[v];
      if (moved) costp_ -= x ? cost_[v] : -cost_[v];
      for (auto [r, a] : cols_[v]) {
        minact_[r] -= (x ? a : 0) - std::min<std::int64_t>(a, 0);
        if (moved) {
          actp_[r] -= x ? a : -a;
          update_violation(r);
        }
      }
      val_[v] = -1;
    }
    for (auto r : queue_) queued_[r] = 0;
    queue_.clear();
  }

  bool assign_checked(VarId v, std::uint8_t x) {
    if (val_[v] >= 0) return val_[v] == x;
    assign(v, x);
    return true;
  }

  // Bounds propagation to fixpoint, including the objective cutoff. False on conflict.
  bool propagate() {
    std::size_t head = 0;
    while (true) {
      while (head < queue_.size()) {
        const auto r = queue_[head++];
        queued_[r] = 0;
        const Row& row = rows_[r];
        const std::int64_t slack = row.rhs - minact_[r];
        if (slack < 0) return fail(head);
        if (slack >= row.maxabs) continue;
        for (auto [v, a] : row.terms) {
          if (val_[v] >= 0 || std::abs(a) <= slack) continue;
          assign(v, a > 0 ? 0 : 1);
        }
      }
      queue_.clear();
      head = 0;
      const std::int64_t slack = limit_ - costp_;
      if (slack < 0) {
        exclude(costp_);
        return false;
      }
      for (VarId v : by_cost_) {
        if (std::abs(cost_[v]) <= slack) break;
        if (val_[v] < 0) {
          exclude(costp_ + std::abs(cost_[v]));
          assign(v, pref_[v]);
        }
      }
      if (queue_.empty()) return true;
    }
  }

  // Smallest cost of a completion cut off by the current limit.
  void exclude(std::int64_t bound) {
    if (bound < kNoBound) next_limit_ = std::min(next_limit_, bound);
  }

  bool fail(std::size_t head) {
    for (std::size_t i = head; i < queue_.size(); ++i) queued_[queue_[i]] = 0;
    queue_.clear();
    return false;
  }

  struct Choice {
    std::int64_t bound = 0;
    VarId var = 0;
    bool any = false;
  };

  // Lower bound from the preferred completion plus rows violated by it whose helpful variables
  // are pairwise disjoint, each charged its fractional-knapsack repair cost. Also picks the
  // branching variable: the cheapest helpful variable of the violated row with fewest of them.
  Choice bound_and_branch() {
    Choice ch;
    std::int64_t extra = 0;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    std::int64_t best_rank = 0;
    std::int64_t single = 0;
    next_stamp();
    rowbuf_.clear();
    for (auto r : violated_) {
      const Row& row = rows_[r];
      const std::int64_t deficit = actp_[r] - row.rhs;
      helpful_.clear();
      for (auto [v, a] : row.terms) {
        if (val_[v] >= 0) continue;
        const bool helps = pref_[v] ? a > 0 : a < 0;
        if (helps) helpful_.push_back({v, std::abs(a), std::abs(cost_[v]), induced_[v]});
      }
      if (helpful_.empty()) {
        ch.bound = kNoBound;  // cannot be repaired; propagation normally catches this first
        return ch;
      }
      std::int64_t need = deficit, repair = 0;
      std::sort(helpful_.begin(), helpful_.end(), [](const Helpful& x, const Helpful& y) {
        // cost per unit of reduction, ascending
        return x.cost * y.reduce < y.cost * x.reduce || (x.cost * y.reduce == y.cost * x.reduce && x.var < y.var);
      });
      for (const auto& h : helpful_) {
        if (need <= 0) break;
        if (h.reduce >= need) {
          repair += (h.cost * need + h.reduce - 1) / h.reduce;
          need = 0;
        } else {
          repair += h.cost;
          need -= h.reduce;
        }
      }
      if (need > 0) {
        ch.bound = kNoBound;
        return ch;
      }
      rowbuf_.push_back({r, repair});
      // Any repair switches at least one helpful variable.
      std::int64_t cheapest = kNoBound;
      for (const auto& h : helpful_) cheapest = std::min(cheapest, h.induced);
      single = std::max(single, cheapest);
      // Prefer branching on a variable that costs something: zero-cost auxiliaries are then
      // settled by propagation once the costly alternatives are decided.
      auto rank = [](const Helpful& h) { return h.cost > 0 ? h.cost : kNoBound; };
      if (helpful_.size() <= fewest) {
        bool fresh = helpful_.size() < fewest;
        fewest = helpful_.size();
        for (const auto& h : helpful_) {
          if (fresh || rank(h) < best_rank || (rank(h) == best_rank && h.var < ch.var)) {
            ch.var = h.var;
            best_rank = rank(h);
            fresh = false;
          }
        }
        ch.any = true;
      }
    }
    std::sort(rowbuf_.begin(), rowbuf_.end(), [](const RowBound& a, const RowBound& b) {
      return a.repair > b.repair || (a.repair == b.repair && a.row < b.row);
    });
    for (const auto& rb : rowbuf_) {
      if (rb.repair == 0) break;
      bool disjoint = true;
      for (auto [v, a] : rows_[rb.row].terms) {
        if (val_[v] < 0 && (pref_[v] ? a > 0 : a < 0) && mark_[v] == stamp_) {
          disjoint = false;
          break;
        }
      }
      if (!disjoint) continue;
      for (auto [v, a] : rows_[rb.row].terms) {
        if (val_[v] < 0 && (pref_[v] ? a > 0 : a < 0)) mark_[v] = stamp_;
      }
      extra += rb.repair;
    }
    ch.bound = costp_ + std::max(extra, single);
    return ch;
  }

  void tick() {
    ++nodes_;
    if (nodes_ - budget_start_ > config_.node_cap) throw CapReached{};
    if (config_.deadline && (nodes_ & 255) == 0 && std::chrono::steady_clock::now() > *config_.deadline) {
      throw CapReached{};
    }
  }

  // Returns true when the search should stop (first_only and a solution was found).
  bool search() {
    tick();
    if (!propagate_and_probe()) return false;
    Choice ch = bound_and_branch();
    if (ch.bound > limit_) {
      exclude(ch.bound);
      return false;
    }
    if (!ch.any) {
      std::vector<std::uint8_t> x(pref_.size());
      for (std::size_t v = 0; v < x.size(); ++v) x[v] = val_[v] >= 0 ? static_cast<std::uint8_t>(val_[v]) : pref_[v];
      best_ = std::move(x);
      if (first_only_) return true;
      limit_ = costp_ - 1;
      return false;
    }
    const std::size_t mark = trail_.size();
    const VarId v = ch.var;
    for (std::uint8_t x : {static_cast<std::uint8_t>(1 - pref_[v]), pref_[v]}) {
      assign(v, x);
      const bool stop = search();
      unassign_to(mark);
      if (stop) return true;
    }
    return false;
  }

  struct Helpful {
    VarId var;
    std::int64_t reduce;
    std::int64_t cost;
    std::int64_t induced;
  };
  struct RowBound {
    std::uint32_t row;
    std::int64_t repair;
  };

  const SolverConfig& config_;
  std::vector<std::int64_t> cost_;
  std::int64_t constant_ = 0;
  std::vector<std::uint8_t> pref_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> cols_;
  std::vector<std::int8_t> root_fixed_;
  std::vector<VarId> by_cost_;

  std::vector<std::int8_t> val_;
  std::vector<VarId> trail_;
  std::vector<std::int64_t> minact_, actp_;
  std::vector<std::int32_t> vpos_;
  std::vector<std::uint32_t> violated_;
  std::vector<std::uint8_t> queued_;
  std::vector<std::uint32_t> queue_;
  std::int64_t costp_ = 0;
  std::vector<std::uint32_t> mark_;
  std::vector<std::int64_t> induced_;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> dominant_;
  std::uint32_t stamp_ = 0;
  std::vector<Helpful> helpful_;
  std::vector<RowBound> rowbuf_;

  std::int64_t limit_ = kNoBound;
  std::int64_t next_limit_ = kNoBound;
  bool first_only_ = false;
  std::optional<std::vector<std::uint8_t>> best_;
  std::uint64_t nodes_ = 0;
  std::uint64_t budget_start_ = 0;
};

Solution finish(const IlpProblem& problem, std::vector<std::uint8_t> x, SolveStats stats) {
  Solution s;
  s.status = SolveStatus::Optimal;
  s.objective_scaled = problem.objective.scaled_value(x);
  s.scale = problem.objective.scale;
  s.assignment = std::move(x);
  s.stats = stats;
  return s;
}

// Optimal solve on an engine that may carry extra cuts.
Solution solve_engine(const IlpProblem& problem, Engine& engine, const SolverConfig& config) {
  Solution out;
  out.scale = problem.objective.scale;
  SolveStats stats;
  const std::uint64_t start = engine.nodes();
  engine.start_budget();
  try {
    // Iterative deepening on the objective: each pass only explores nodes whose bound stays
    // within the limit, and the next limit is the smallest bound a pass cut off. The first pass
    // that finds anything returns the optimum.
    std::optional<std::vector<std::uint8_t>> best;
    std::int64_t limit = -kNoBound;
    while (true) {
      best = engine.run(limit, false, {});
      if (best || engine.next_limit() >= kNoBound) break;
      limit = engine.next_limit();
    }
    stats.nodes = engine.nodes() - start;
    if (!best) {
      out.stats = stats;
      return out;
    }
    if (config.canonical) {
      const std::int64_t value = engine.cost_of(*best);
      std::vector<std::pair<VarId, std::uint8_t>> fixes;
      for (VarId v = 0; v < problem.size(); ++v) {
        if (problem.variables[v].kind != VarKind::Indicator || problem.fixed[v] >= 0) continue;
        const std::uint8_t want = engine.preferred(v);
        if ((*best)[v] != want) {
          fixes.emplace_back(v, want);
          ++stats.canonical_probes;
          if (auto alt = engine.run(value, true, fixes)) {
            best = std::move(alt);
            continue;
          }
          fixes.back().second = (*best)[v];
        } else {
          fixes.emplace_back(v, want);
        }
      }
      stats.nodes = engine.nodes() - start;
    }
    return finish(problem, std::move(*best), stats);
  } catch (const CapReached&) {
    out.status = SolveStatus::CapExceeded;
    stats.nodes = engine.nodes() - start;
    out.stats = stats;
    return out;
  }
}

}  // namespace

Solution solve(const IlpProblem& problem, const SolverConfig& config) {
  Engine engine(problem, config);
  return solve_engine(problem, engine, config);
}

TopK enumerate_topk(const IlpProblem& problem, std::size_t k, const SolverConfig& config) {
  TopK out;
  if (k == 0) throw Error(ErrorCode::InvalidCondition, "k must be at least 1");
  Engine engine(problem, config);
  for (std::size_t i = 0; i < k; ++i) {
    Solution s = solve_engine(problem, engine, config);
    out.stats.nodes += s.stats.nodes;
    out.stats.canonical_probes += s.stats.canonical_probes;
    if (s.status == SolveStatus::CapExceeded) {
      out.status = SolveStatus::CapExceeded;
      return out;
    }
    if (!s.optimal()) break;
    engine.add_cut(no_good_cut(problem, s.assignment));
    out.solutions.push_back(std::move(s));
  }
  out.status = out.solutions.empty() ? SolveStatus::Infeasible : SolveStatus::Optimal;
  return out;
}

}  // namespace cfx
