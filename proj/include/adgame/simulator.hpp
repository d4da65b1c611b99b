#pragma once

#include <adgame/defender.hpp>
#include <adgame/exact_solver.hpp>
#include <adgame/graph_io.hpp>
#include <adgame/value_net.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <thread>
#include <utility>
#include <vector>

namespace adgame {

enum class PolicyKind { ExactDP, ApproximatorGreedy };

inline std::string_view to_string(PolicyKind k) {
    return k == PolicyKind::ExactDP ? "exact" : "approximator";
}

/// Attacker decision rule. `choose` must be safe to call concurrently after
/// `prepare` has been called on the run's initial state.
struct PolicyHandle {
    PolicyKind kind = PolicyKind::ExactDP;
    std::function<std::optional<NspId>(const AttackerState&)> choose;
    std::function<void(const AttackerState&)> prepare = [](const AttackerState&) {};
};

inline PolicyHandle make_exact_policy(std::shared_ptr<ExactSolver> solver) {
    PolicyHandle p;
    p.kind = PolicyKind::ExactDP;
    p.prepare = [solver](const AttackerState& s0) { solver->solve(s0); };
    p.choose = [solver](const AttackerState& s) -> std::optional<NspId> {
        if (const DpResult* r = std::as_const(*solver).cached(s)) return r->best_action;
        return solver->best_action(s);
    };
    return p;
}

inline PolicyHandle make_exact_policy(const CondensedGraph& cg) {
    return make_exact_policy(std::make_shared<ExactSolver>(cg));
}

inline PolicyHandle make_approximator_policy(const ValueApproximator& approx) {
    PolicyHandle p;
    p.kind = PolicyKind::ApproximatorGreedy;
    p.choose = [&approx](const AttackerState& s) { return approx.greedy_action(s); };
    return p;
}

struct SimulationReport {
    std::size_t runs = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double std_error = 0.0;
    double wall_time = 0.0;  ///< seconds

    static SimulationReport from_counts(std::size_t runs, std::size_t successes, double seconds) {
        SimulationReport r;
        r.runs = runs;
        r.successes = successes;
        r.success_rate = runs ? static_cast<double>(successes) / static_cast<double>(runs) : 0.0;
        r.std_error = runs ? std::sqrt(r.success_rate * (1.0 - r.success_rate) / static_cast<double>(runs)) : 0.0;
        r.wall_time = seconds;
        return r;
    }
};

inline void write_report_csv_header(std::ostream& os) { os << "plan,evaluator,runs,rate,std_error,seconds\n"; }

inline void write_report_csv(std::ostream& os, const std::string& plan_id, std::string_view evaluator,
                             const SimulationReport& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", r.wall_time);
    os << plan_id << ',' << evaluator << ',' << r.runs << ',' << format_double(r.success_rate) << ','
       << format_double(r.std_error) << ',' << secs << '\n';
}

namespace detail {

inline NspId checked_action(const CondensedGraph& cg, const PolicyHandle& policy, const AttackerState& s) {
    auto a = policy.choose(s);
    if (!a || !is_admissible(cg, s, *a))
        throw ContractViolation("policy returned an inadmissible action in state " + s.to_string());
    return *a;
}

/// One attack at NSP granularity; true if the DA is reached.
inline bool run_kernel_once(const CondensedGraph& cg, AttackerState s, const PolicyHandle& policy, Rng& rng) {
    while (true) {
        if (auto tv = terminal_value(cg, s)) return *tv == 1.0;
        const NspId a = checked_action(cg, policy, s);
        bool failed = false;
        for (EdgeId e : cg.nsps[a].edges) {
            const double u = uniform01(rng);
            if (u < cg.p_detect[e]) return false;
            if (u < cg.p_detect[e] + cg.p_fail[e]) {
                for (NspId j : cg.edge_to_nsps.at(e))
                    if (s[j] == Status::Unattempted) s.set(j, Status::Failed);
                failed = true;
                break;
            }
        }
        if (!failed) s.set(a, Status::Successful);
    }
}

/// Splits [0, runs) into contiguous chunks over `workers` threads; each run
/// uses its own stream so the total does not depend on the split.
inline std::size_t count_successes(std::size_t runs, std::size_t workers,
                                   const std::function<bool(std::size_t)>& run) {
    workers = std::max<std::size_t>(1, std::min(workers, runs));
    std::vector<std::size_t> wins(workers, 0);
    std::vector<std::exception_ptr> errors(workers);
    auto body = [&](std::size_t w) {
        try {
            const std::size_t lo = runs * w / workers, hi = runs * (w + 1) / workers;
            for (std::size_t r = lo; r < hi; ++r) wins[w] += run(r) ? 1 : 0;
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::size_t total = 0;
    for (auto v : wins) total += v;
    return total;
}

}  // namespace detail

/// Monte Carlo success rate of `policy` against `plan` on the kernel.
inline SimulationReport simulate(const CondensedGraph& cg, const BlockingPlan& plan, const PolicyHandle& policy,
                                 std::size_t runs, std::uint64_t seed, std::size_t workers = 1) {
    if (runs == 0) throw ConfigError("simulate needs at least one run");
    const auto start = std::chrono::steady_clock::now();
    const AttackerState s0 = initial_state(cg, plan);
    policy.prepare(s0);
    const std::size_t wins = detail::count_successes(runs, workers, [&](std::size_t r) {
        Rng rng = make_rng(seed, r);
        return detail::run_kernel_once(cg, s0, policy, rng);
    });
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    return SimulationReport::from_counts(runs, wins, dt.count());
}

/// Edge-level simulation on the pruned original graph. The policy still
/// decides at NSP granularity, but each attempt walks the graph from the
/// chosen NSP's first edge along sole successors, sampling every edge with
/// its own probabilities (blocked edges always fail). Failed edges stay
/// failed for the rest of the run.
inline SimulationReport simulate_on_original(const AttackGraph& g, const CondensedGraph& cg, const BlockingPlan& plan,
                                             const PolicyHandle& policy, std::size_t runs, std::uint64_t seed,
                                             std::size_t workers = 1) {
    if (runs == 0) throw ConfigError("simulate needs at least one run");
    if (plan.size() != cg.bw_edges.size()) throw ContractViolation("plan length does not match the kernel");
    const auto start = std::chrono::steady_clock::now();
    const NodeId da = g.require_da();
    const Adjacency adj(g);
    std::vector<char> blocked(g.edge_count(), 0);
    for (std::size_t i : plan.blocked()) blocked[cg.bw_edges[i]] = 1;

    auto derive = [&](const std::vector<char>& failed_edge, const std::vector<char>& done) {
        AttackerState s(cg.nsp_count());
        for (NspId i = 0; i < cg.nsp_count(); ++i) {
            if (done[i]) {
                s.set(i, Status::Successful);
                continue;
            }
            for (EdgeId e : cg.nsps[i].edges)
                if (failed_edge[e]) {
                    s.set(i, Status::Failed);
                    break;
                }
        }
        return s;
    };

    std::vector<char> none(cg.nsp_count(), 0);
    policy.prepare(derive(blocked, none));

    const std::size_t wins = detail::count_successes(runs, workers, [&](std::size_t r) {
        Rng rng = make_rng(seed, r);
        std::vector<char> failed_edge = blocked;
        std::vector<char> done(cg.nsp_count(), 0);
        std::vector<char> secured(g.node_count(), 0);
        for (NodeId e : g.entry_nodes()) secured[e] = 1;
        while (true) {
            AttackerState s = derive(failed_edge, done);
            // the DA is only reached inside the walk, so a terminal state here is a loss
            if (terminal_value(cg, s)) return false;
            const NspId a = detail::checked_action(cg, policy, s);
            if (!secured[cg.nsps[a].source]) throw ContractViolation("policy attacked from an unsecured node");
            EdgeId e = cg.nsps[a].edges.front();
            while (true) {
                const Edge& edge = g.edge(e);
                const double pd = blocked[e] ? 0.0 : edge.p_detect;
                const double pf = blocked[e] ? 1.0 : edge.p_fail;
                const double u = uniform01(rng);
                if (u < pd) return false;
                if (u < pd + pf) {
                    failed_edge[e] = 1;
                    break;
                }
                const NodeId v = edge.dst;
                if (v == da) return true;
                if (adj.out[v].size() != 1) {
                    if (adj.out[v].empty()) throw KernelError("walk reached a dead end off the DA");
                    secured[v] = 1;
                    done[a] = 1;
                    break;
                }
                e = adj.out[v].front();
            }
        }
    });
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    return SimulationReport::from_counts(runs, wins, dt.count());
}

/// Monte Carlo fitness: simulated success rate of `policy` under each plan.
inline FitnessEvaluator make_monte_carlo_evaluator(const CondensedGraph& cg, PolicyHandle policy, std::size_t runs,
                                                   std::uint64_t seed) {
    return FitnessEvaluator(EvaluatorKind::MonteCarlo, [&cg, policy, runs, seed](const BlockingPlan& plan) {
        return simulate(cg, plan, policy, runs, seed).success_rate;
    });
}

}  // namespace adgame
