#pragma once

#include <adgame/mdp.hpp>

#include <optional>
#include <unordered_map>

namespace adgame {

struct DpResult {
    double value = 0.0;
    std::optional<NspId> best_action;
};

/// Exact attacker dynamic program, memoized over the states reachable from
/// the queried ones. Values depend only on the state, so one solver can be
/// shared by every blocking plan on the same kernel.
class ExactSolver {
public:
    static constexpr std::size_t kDefaultStateBudget = 20'000'000;

    explicit ExactSolver(const CondensedGraph& cg, std::size_t state_budget = kDefaultStateBudget)
        : cg_(&cg), budget_(state_budget) {}

    DpResult solve(const AttackerState& s) {
        check_state(*cg_, s);
        return visit(s);
    }

    double value(const AttackerState& s) { return solve(s).value; }
    std::optional<NspId> best_action(const AttackerState& s) { return solve(s).best_action; }

    /// Read-only lookup; safe to call concurrently once the states are solved.
    const DpResult* cached(const AttackerState& s) const {
        auto it = memo_.find(s);
        return it == memo_.end() ? nullptr : &it->second;
    }

    std::size_t memo_size() const noexcept { return memo_.size(); }
    const CondensedGraph& kernel() const noexcept { return *cg_; }

private:
    DpResult visit(const AttackerState& s) {
        if (auto it = memo_.find(s); it != memo_.end()) return it->second;
        DpResult r;
        if (auto tv = terminal_value(*cg_, s)) {
            r.value = *tv;
        } else {
            r.value = -1.0;
            for (NspId a : admissible_actions(*cg_, s)) {
                const auto dist = transition(*cg_, s, a);
                double q = 0.0;
                for (const Outcome& o : dist.outcomes) q += o.prob * visit(o.state).value;
                if (q > r.value) r.value = q, r.best_action = a;
            }
        }
        if (memo_.size() >= budget_)
            throw ResourceError("exact DP exceeded its budget of " + std::to_string(budget_) +
                                " states; use the neural approximation instead");
        memo_.emplace(s, r);
        return r;
    }

    const CondensedGraph* cg_;
    std::size_t budget_;
    std::unordered_map<AttackerState, DpResult, AttackerStateHash> memo_;
};

/// Value of the attacker's best response to `plan`.
inline double dp_value(const CondensedGraph& cg, const BlockingPlan& plan) {
    ExactSolver solver(cg);
    return solver.value(initial_state(cg, plan));
}

}  // namespace adgame
