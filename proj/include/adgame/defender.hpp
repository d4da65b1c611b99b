#pragma once

#include <adgame/exact_solver.hpp>
#include <adgame/graph_io.hpp>
#include <adgame/plan.hpp>
#include <adgame/value_net.hpp>

#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <unordered_map>
#include <vector>

namespace adgame {

enum class EvaluatorKind { ExactDP, Approximator, MonteCarlo };

inline std::string_view to_string(EvaluatorKind k) {
    switch (k) {
        case EvaluatorKind::ExactDP: return "exact";
        case EvaluatorKind::Approximator: return "approximator";
        case EvaluatorKind::MonteCarlo: return "montecarlo";
    }
    return "?";
}

/// Attacker success probability for a blocking plan; lower is better for the
/// defender. Copies share one result cache.
class FitnessEvaluator {
public:
    using Fn = std::function<double(const BlockingPlan&)>;

    FitnessEvaluator(EvaluatorKind kind, Fn fn) : kind_(kind), state_(std::make_shared<State>()) {
        state_->fn = std::move(fn);
    }

    double operator()(const BlockingPlan& plan) const {
        auto& cache = state_->cache;
        if (auto it = cache.find(plan); it != cache.end()) return it->second;
        double v = state_->fn(plan);
        ++state_->evaluations;
        cache.emplace(plan, v);
        return v;
    }

    EvaluatorKind kind() const noexcept { return kind_; }
    /// Number of distinct plans evaluated so far.
    std::size_t evaluations() const noexcept { return state_->evaluations; }

private:
    struct State {
        Fn fn;
        std::unordered_map<BlockingPlan, double, BlockingPlanHash> cache;
        std::size_t evaluations = 0;
    };
    EvaluatorKind kind_;
    std::shared_ptr<State> state_;
};

inline FitnessEvaluator make_exact_evaluator(const CondensedGraph& cg,
                                             std::size_t state_budget = ExactSolver::kDefaultStateBudget) {
    auto solver = std::make_shared<ExactSolver>(cg, state_budget);
    return FitnessEvaluator(EvaluatorKind::ExactDP, [solver, &cg](const BlockingPlan& plan) {
        return solver->value(initial_state(cg, plan));
    });
}

/// The approximator must outlive the evaluator and stay unchanged while its
/// results are cached.
inline FitnessEvaluator make_approximator_evaluator(const ValueApproximator& approx) {
    return FitnessEvaluator(EvaluatorKind::Approximator, [&approx](const BlockingPlan& plan) {
        return approx.predict(initial_state(approx.kernel(), plan));
    });
}

// ---------------------------------------------------------------------------
// Variation operators

inline BlockingPlan random_plan(std::size_t n_bw, std::size_t k, Rng& rng) {
    if (k > n_bw) throw ConfigError("budget exceeds the number of block-worthy edges");
    return BlockingPlan::from_indices(n_bw, sample_without_replacement(rng, n_bw, k));
}

/// Turns `x` blocked edges off and `x` unblocked edges on, x clamped so the
/// budget is preserved.
inline BlockingPlan mutate(const BlockingPlan& p, std::size_t x, Rng& rng) {
    auto ones = p.indices(true), zeros = p.indices(false);
    x = std::min({x, ones.size(), zeros.size()});
    BlockingPlan child = p;
    for (std::size_t i : sample_from(rng, ones, x)) child.set(i, false);
    for (std::size_t i : sample_from(rng, zeros, x)) child.set(i, true);
    return child;
}

/// Exchanges `x` coordinates where p=0,q=1 with `x` coordinates where p=1,q=0.
inline std::pair<BlockingPlan, BlockingPlan> crossover(const BlockingPlan& p, const BlockingPlan& q, std::size_t x,
                                                       Rng& rng) {
    if (p.size() != q.size()) throw ContractViolation("crossover parents differ in length");
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!p[i] && q[i]) a.push_back(i);
        if (p[i] && !q[i]) b.push_back(i);
    }
    x = std::min({x, a.size(), b.size()});
    BlockingPlan c1 = p, c2 = q;
    for (std::size_t i : sample_from(rng, a, x)) c1.set(i, true), c2.set(i, false);
    for (std::size_t i : sample_from(rng, b, x)) c1.set(i, false), c2.set(i, true);
    return {std::move(c1), std::move(c2)};
}

// ---------------------------------------------------------------------------
// Populations and survivor selection

struct Member {
    BlockingPlan plan;
    double fitness = 0.0;
    std::uint64_t birth = 0;  ///< insertion order; smaller is older
};

struct Population {
    std::vector<Member> members;
    std::uint64_t next_birth = 0;

    void add(BlockingPlan plan, double fitness) { members.push_back(Member{std::move(plan), fitness, next_birth++}); }

    std::size_t best() const {
        std::size_t b = 0;
        for (std::size_t i = 1; i < members.size(); ++i)
            if (members[i].fitness < members[b].fitness ||
                (members[i].fitness == members[b].fitness && members[i].birth < members[b].birth))
                b = i;
        return b;
    }

    std::size_t worst() const {
        std::size_t w = 0;
        for (std::size_t i = 1; i < members.size(); ++i)
            if (members[i].fitness > members[w].fitness ||
                (members[i].fitness == members[w].fitness && members[i].birth < members[w].birth))
                w = i;
        return w;
    }

    double best_fitness() const { return members.at(best()).fitness; }

    std::vector<BlockingPlan> plans() const {
        std::vector<BlockingPlan> out;
        for (const auto& m : members) out.push_back(m.plan);
        return out;
    }

    /// Per-edge block counts C(bw).
    std::vector<std::size_t> edge_counts() const {
        std::vector<std::size_t> c(members.empty() ? 0 : members.front().plan.size(), 0);
        for (const auto& m : members)
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += m.plan[i];
        return c;
    }
};

/// Index of the member to drop after `newcomer` joined: the one whose removal
/// leaves the lexicographically smallest descending-sorted count vector
/// C(bw) - p_j (oldest first on ties), unless the newcomer is strictly the
/// fittest, in which case the worst-fitness member goes. `keep`, if given,
/// is never chosen by the diversity rule.
inline std::size_t diversity_select_removal(const Population& pop, std::size_t newcomer,
                                            std::optional<std::size_t> keep = std::nullopt) {
    const auto& ms = pop.members;
    bool strictly_best = true;
    for (std::size_t i = 0; i < ms.size(); ++i)
        if (i != newcomer && ms[i].fitness <= ms[newcomer].fitness) strictly_best = false;
    if (strictly_best && ms.size() > 1) return pop.worst();

    const auto counts = pop.edge_counts();
    std::size_t chosen = 0;
    std::vector<long> best_key;
    bool any = false;
    for (std::size_t j = 0; j < ms.size(); ++j) {
        if (keep && j == *keep) continue;
        std::vector<long> key(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) key[i] = static_cast<long>(counts[i]) - ms[j].plan[i];
        std::sort(key.begin(), key.end(), std::greater<>());
        if (!any || key < best_key || (key == best_key && ms[j].birth < ms[chosen].birth)) {
            any = true;
            chosen = j;
            best_key = std::move(key);
        }
    }
    return chosen;
}

struct InsertionEvent {
    double child_fitness = 0.0;
    double best_before = 0.0;  ///< population best when the child was offered
    bool accepted = false;
};

struct EvolutionConfig {
    std::size_t budget = 5;        ///< k
    std::size_t mu = 100;
    std::size_t iterations = 10000;
    double band = 0.1;             ///< acceptance band above the population best
    double mutation_prob = 0.5;
    double poisson_mean = 1.0;
    std::function<void(const InsertionEvent&)> on_offer;  ///< optional observer
};

inline Population random_population(std::size_t n_bw, const FitnessEvaluator& ev, const EvolutionConfig& cfg,
                                    Rng& rng) {
    if (cfg.budget > n_bw)
        throw ConfigError("budget k=" + std::to_string(cfg.budget) + " exceeds |BW|=" + std::to_string(n_bw));
    if (cfg.mu == 0) throw ConfigError("population size must be positive");
    Population pop;
    for (std::size_t i = 0; i < cfg.mu; ++i) {
        auto plan = random_plan(n_bw, cfg.budget, rng);
        double f = ev(plan);
        pop.add(std::move(plan), f);
    }
    return pop;
}

namespace detail {

enum class Survival { Diversity, WorstFitness };

inline Population evolve(std::size_t n_bw, const FitnessEvaluator& ev, const EvolutionConfig& cfg, Rng& rng,
                         Survival survival) {
    Population pop = random_population(n_bw, ev, cfg, rng);
    auto offer = [&](BlockingPlan child) {
        const double f = ev(child);
        const double best = pop.best_fitness();
        const bool accepted = survival == Survival::WorstFitness || f <= best + cfg.band;
        if (cfg.on_offer) cfg.on_offer(InsertionEvent{f, best, accepted});
        if (!accepted) return;
        pop.add(std::move(child), f);
        std::size_t drop = pop.worst();
        // members left outside the band by an improved best go first
        if (survival == Survival::Diversity && pop.members[drop].fitness <= pop.best_fitness() + cfg.band) {
            // a sole best member is kept, otherwise the optimum can be traded for spread
            const std::size_t b = pop.best();
            std::size_t ties = 0;
            for (const auto& m : pop.members) ties += m.fitness == pop.members[b].fitness;
            drop = diversity_select_removal(pop, pop.members.size() - 1,
                                            ties == 1 ? std::optional<std::size_t>(b) : std::nullopt);
        }
        pop.members.erase(pop.members.begin() + static_cast<std::ptrdiff_t>(drop));
    };
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const auto x = static_cast<std::size_t>(std::max(1, poisson(rng, cfg.poisson_mean)));
        if (bernoulli(rng, cfg.mutation_prob) || pop.members.size() < 2) {
            const auto& parent = pop.members[uniform_index(rng, pop.members.size())].plan;
            offer(mutate(parent, x, rng));
        } else {
            auto idx = sample_without_replacement(rng, pop.members.size(), 2);
            auto [c1, c2] = crossover(pop.members[idx[0]].plan, pop.members[idx[1]].plan, x, rng);
            offer(std::move(c1));
            offer(std::move(c2));
        }
    }
    return pop;
}

}  // namespace detail

/// Evolutionary diversity optimisation over blocking plans.
inline Population edo_run(std::size_t n_bw, const FitnessEvaluator& ev, const EvolutionConfig& cfg, Rng& rng) {
    return detail::evolve(n_bw, ev, cfg, rng, detail::Survival::Diversity);
}

inline Population edo_run(const CondensedGraph& cg, const FitnessEvaluator& ev, const EvolutionConfig& cfg, Rng& rng) {
    return edo_run(cg.bw_edges.size(), ev, cfg, rng);
}

/// Value-based evolution: same loop, no band, the worst member is dropped.
inline Population vec_run(std::size_t n_bw, const FitnessEvaluator& ev, const EvolutionConfig& cfg, Rng& rng) {
    return detail::evolve(n_bw, ev, cfg, rng, detail::Survival::WorstFitness);
}

inline Population vec_run(const CondensedGraph& cg, const FitnessEvaluator& ev, const EvolutionConfig& cfg, Rng& rng) {
    return vec_run(cg.bw_edges.size(), ev, cfg, rng);
}

struct PlanResult {
    BlockingPlan plan;
    double fitness = 0.0;
    std::size_t evaluations = 0;
};

/// k rounds, each adding the single edge that lowers fitness most.
inline PlanResult greedy_run(std::size_t n_bw, const FitnessEvaluator& ev, std::size_t k) {
    if (k > n_bw) throw ConfigError("budget exceeds the number of block-worthy edges");
    PlanResult r{BlockingPlan(n_bw), ev(BlockingPlan(n_bw)), 1};
    for (std::size_t round = 0; round < k; ++round) {
        std::optional<std::size_t> pick;
        double best = 0.0;
        for (std::size_t i = 0; i < n_bw; ++i) {
            if (r.plan[i]) continue;
            BlockingPlan trial = r.plan;
            trial.set(i, true);
            double f = ev(trial);
            ++r.evaluations;
            if (!pick || f < best) pick = i, best = f;
        }
        r.plan.set(*pick, true);
        r.fitness = best;
    }
    return r;
}

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(c);
}

inline constexpr double kDefaultEnumerationBudget = 1e6;

/// Global optimum by enumeration; ties go to the lexicographically smallest plan.
inline PlanResult exhaustive_run(std::size_t n_bw, const FitnessEvaluator& ev, std::size_t k,
                                 double enumeration_budget = kDefaultEnumerationBudget) {
    if (k > n_bw) throw ConfigError("budget exceeds the number of block-worthy edges");
    if (binomial(n_bw, k) > enumeration_budget)
        throw ResourceError("C(" + std::to_string(n_bw) + ", " + std::to_string(k) + ") plans exceed the enumeration budget");
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::optional<PlanResult> best;
    std::size_t evaluations = 0;
    while (true) {
        auto plan = BlockingPlan::from_indices(n_bw, idx);
        double f = ev(plan);
        ++evaluations;
        if (!best || f < best->fitness || (f == best->fitness && plan < best->plan)) best = PlanResult{plan, f, 0};
        // next combination in lexicographic index order
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n_bw - k + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    best->evaluations = evaluations;
    return *best;
}

// ---------------------------------------------------------------------------
// Population snapshots: one "<bits> <fitness>" line per member, "-" for an
// empty bit vector.

inline void write_population(std::ostream& os, const Population& pop) {
    os << "# plan fitness\n";
    for (const auto& m : pop.members) {
        auto bits = m.plan.to_string();
        os << (bits.empty() ? "-" : bits) << ' ' << format_double(m.fitness) << '\n';
    }
}

inline Population read_population(std::istream& is) {
    Population pop;
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> width;
    while (std::getline(is, line)) {
        ++lineno;
        auto t = detail::split_ws(line);
        if (t.empty() || t[0].starts_with('#')) continue;
        if (t.size() != 2) detail::parse_fail(lineno, "record", "expected '<plan> <fitness>'");
        auto plan = t[0] == "-" ? BlockingPlan() : BlockingPlan::from_string(t[0]);
        if (width && *width != plan.size()) detail::parse_fail(lineno, "plan", "plans differ in length");
        width = plan.size();
        pop.add(std::move(plan), detail::parse_number<double>(t[1], lineno, "fitness"));
    }
    return pop;
}

}  // namespace adgame
