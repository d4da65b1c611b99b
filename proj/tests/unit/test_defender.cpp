#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <climits>
#include <sstream>

using namespace adgame;

namespace {

FitnessEvaluator table_evaluator(std::uint64_t seed) {
    return FitnessEvaluator(EvaluatorKind::ExactDP, [seed](const BlockingPlan& p) {
        std::uint64_t h = seed;
        for (auto b : p.bits()) h = mix64(h ^ b);
        return static_cast<double>(h % 1000) / 1000.0;
    });
}

}  // namespace

TEST(Operators, MutationKeepsBudget) {
    Rng rng = make_rng(1);
    auto p = BlockingPlan::from_string("10001001");
    for (std::size_t x = 1; x <= 6; ++x) {
        auto c = mutate(p, x, rng);
        EXPECT_EQ(c.budget(), 3u);
        std::size_t diff = 0;
        for (std::size_t i = 0; i < p.size(); ++i) diff += p[i] != c[i];
        EXPECT_EQ(diff, 2 * std::min<std::size_t>(x, 3));
    }
    auto full = BlockingPlan::from_string("111");
    EXPECT_EQ(mutate(full, 2, rng), full);
}

TEST(Operators, CrossoverKeepsBudget) {
    Rng rng = make_rng(2);
    auto [a, b] = crossover(BlockingPlan::from_string("1000"), BlockingPlan::from_string("0001"), 1, rng);
    EXPECT_EQ(a.to_string(), "0001");
    EXPECT_EQ(b.to_string(), "1000");
    auto same = BlockingPlan::from_string("0110");
    auto [c, d] = crossover(same, same, 3, rng);
    EXPECT_EQ(c, same);
    EXPECT_EQ(d, same);
    for (int t = 0; t < 10000; ++t) {
        auto p = random_plan(12, 4, rng), q = random_plan(12, 4, rng);
        auto [x, y] = crossover(p, q, 1 + uniform_index(rng, 5), rng);
        ASSERT_EQ(x.budget(), 4u);
        ASSERT_EQ(y.budget(), 4u);
        for (std::size_t i = 0; i < 12; ++i) ASSERT_EQ(x[i] + y[i], p[i] + q[i]);
    }
    EXPECT_THROW(crossover(BlockingPlan(3), BlockingPlan(4), 1, rng), ContractViolation);
}

TEST(Survivors, DuplicateIsRemoved) {
    Population pop;
    for (int i = 0; i < 4; ++i) pop.add(BlockingPlan::from_string("1100"), 0.5);
    pop.add(BlockingPlan::from_string("0011"), 0.5);
    const auto r = diversity_select_removal(pop, 4);
    EXPECT_LT(r, 4u);
    EXPECT_EQ(r, 0u);  // oldest duplicate
}

TEST(Survivors, StrictlyBestNewcomerEvictsWorst) {
    Population pop;
    pop.add(BlockingPlan::from_string("1100"), 0.5);
    pop.add(BlockingPlan::from_string("0011"), 0.7);
    pop.add(BlockingPlan::from_string("1010"), 0.6);
    pop.add(BlockingPlan::from_string("1100"), 0.2);  // least diverse but strictly best
    EXPECT_EQ(diversity_select_removal(pop, 3), 1u);
}

TEST(Survivors, KeptMemberIsSkipped) {
    Population pop;
    pop.add(BlockingPlan::from_string("1100"), 0.1);
    pop.add(BlockingPlan::from_string("1100"), 0.5);
    pop.add(BlockingPlan::from_string("0011"), 0.5);
    pop.add(BlockingPlan::from_string("1010"), 0.6);
    EXPECT_EQ(diversity_select_removal(pop, 3), 0u);
    EXPECT_EQ(diversity_select_removal(pop, 3, 0), 1u);
}

TEST(Survivors, MatchesBruteForceOnSmallPopulations) {
    Rng rng = make_rng(3);
    for (int t = 0; t < 20000; ++t) {
        const std::size_t mu = 1 + uniform_index(rng, 5), n = 2 + uniform_index(rng, 5), k = 1 + uniform_index(rng, n - 1);
        Population pop;
        for (std::size_t i = 0; i <= mu; ++i) pop.add(random_plan(n, k, rng), static_cast<double>(uniform_index(rng, 4)) / 4);
        ASSERT_EQ(diversity_select_removal(pop, mu), fixtures::brute_force_removal(pop, mu)) << "trial " << t;
    }
}

TEST(Evolution, EdoKeepsBudgetAndBand) {
    auto ev = table_evaluator(5);
    EvolutionConfig cfg;
    cfg.budget = 3;
    cfg.mu = 20;
    cfg.iterations = 2000;
    std::size_t offers = 0, accepted = 0;
    cfg.on_offer = [&](const InsertionEvent& e) {
        ++offers;
        if (e.accepted) {
            ++accepted;
            EXPECT_LE(e.child_fitness, e.best_before + 0.1);
        } else {
            EXPECT_GT(e.child_fitness, e.best_before + 0.1);
        }
    };
    Rng rng = make_rng(4);
    auto pop = edo_run(10, ev, cfg, rng);
    EXPECT_EQ(pop.members.size(), 20u);
    for (const auto& m : pop.members) {
        EXPECT_EQ(m.plan.budget(), 3u);
        EXPECT_LE(m.fitness, pop.best_fitness() + 0.1);
        EXPECT_EQ(m.fitness, ev(m.plan));
    }
    EXPECT_GE(offers, 2000u);
    EXPECT_GT(accepted, 0u);
}

TEST(Evolution, ZeroIterationsIsTheRandomPopulation) {
    auto ev = table_evaluator(6);
    EvolutionConfig cfg;
    cfg.budget = 2;
    cfg.mu = 7;
    cfg.iterations = 0;
    Rng a = make_rng(8), b = make_rng(8);
    auto pop = edo_run(6, ev, cfg, a);
    auto ref = random_population(6, ev, cfg, b);
    EXPECT_EQ(pop.plans(), ref.plans());
    EXPECT_THROW(edo_run(1, ev, cfg, a), ConfigError);
}

TEST(Evolution, EdoFindsOptimumOnSmallInstances) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 5 && seed < 200; ++seed) {
        auto cg = kernelize(fixtures::random_instance(seed, 10, 4));
        if (cg.bw_edges.size() < 4) continue;
        ++checked;
        const std::size_t k = 2;
        auto ev = make_exact_evaluator(cg);
        auto opt = exhaustive_run(cg.bw_edges.size(), ev, k);
        EvolutionConfig cfg;
        cfg.budget = k;
        cfg.mu = 10;
        cfg.iterations = 2000;
        Rng rng = make_rng(seed);
        auto pop = edo_run(cg, ev, cfg, rng);
        EXPECT_NEAR(pop.best_fitness(), opt.fitness, 1e-12) << "seed " << seed;
    }
    EXPECT_EQ(checked, 5u);
}

TEST(Evolution, VecKeepsTheFittest) {
    auto ev = table_evaluator(9);
    EvolutionConfig cfg;
    cfg.budget = 2;
    cfg.mu = 3;
    cfg.iterations = 500;
    std::vector<double> all;
    for (unsigned mask = 0; mask < 256; ++mask)
        if (std::popcount(mask) == 2) {
            BlockingPlan p(8);
            for (std::size_t i = 0; i < 8; ++i) p.set(i, (mask >> i) & 1);
            all.push_back(ev(p));
        }
    std::sort(all.begin(), all.end());
    cfg.on_offer = [](const InsertionEvent& e) { EXPECT_TRUE(e.accepted); };
    Rng rng = make_rng(5);
    auto pop = vec_run(8, ev, cfg, rng);
    ASSERT_EQ(pop.members.size(), 3u);
    for (const auto& m : pop.members) EXPECT_EQ(m.plan.budget(), 2u);
    EXPECT_EQ(pop.best_fitness(), all.front());
}

TEST(Evolution, VecRemovesWorstEachStep) {
    // one member per step: mu=1 keeps whichever of parent and child is fitter
    auto ev = table_evaluator(11);
    EvolutionConfig cfg;
    cfg.budget = 3;
    cfg.mu = 1;
    double prev = 2.0;
    for (std::size_t it = 0; it < 50; ++it) {
        cfg.iterations = it;
        Rng rng = make_rng(12);
        auto pop = vec_run(9, ev, cfg, rng);
        ASSERT_EQ(pop.members.size(), 1u);
        EXPECT_LE(pop.best_fitness(), prev);
        prev = pop.best_fitness();
    }
}

TEST(Evolution, EdoSpreadsBlocksMoreEvenlyThanVec) {
    AttackGraph g;
    for (std::uint64_t s = 0;; ++s) {
        g = fixtures::random_instance(s, 12, 8);
        if (kernelize(g).bw_edges.size() >= 6) break;
    }
    auto cg = kernelize(g);
    auto ev = make_exact_evaluator(cg);
    auto spread = [](const Population& pop) {
        auto c = pop.edge_counts();
        std::size_t lo = SIZE_MAX, hi = 0;
        for (auto v : c)
            if (v > 0) lo = std::min(lo, v), hi = std::max(hi, v);
        return static_cast<double>(hi - lo);
    };
    EvolutionConfig cfg;
    cfg.budget = 2;
    cfg.mu = 20;
    cfg.iterations = 1000;
    double edo = 0, vec = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng a = make_rng(seed), b = make_rng(seed);
        edo += spread(edo_run(cg, ev, cfg, a));
        vec += spread(vec_run(cg, ev, cfg, b));
    }
    EXPECT_LE(edo / 10, vec / 10);
}

TEST(Evolution, EdoAndVecAreDeterministic) {
    auto ev = table_evaluator(2);
    EvolutionConfig cfg;
    cfg.budget = 2;
    cfg.mu = 6;
    cfg.iterations = 200;
    Rng a = make_rng(3), b = make_rng(3);
    EXPECT_EQ(edo_run(7, ev, cfg, a).plans(), edo_run(7, ev, cfg, b).plans());
    Rng c = make_rng(3), d = make_rng(3);
    EXPECT_EQ(vec_run(7, ev, cfg, c).plans(), vec_run(7, ev, cfg, d).plans());
}

TEST(Baselines, GreedyIsTrappedExhaustiveIsNot) {
    auto g = fixtures::greedy_trap();
    auto cg = kernelize(g);
    ASSERT_EQ(cg.bw_edges.size(), 3u);
    auto ev = make_exact_evaluator(cg);
    auto greedy = greedy_run(3, ev, 2);
    auto best = exhaustive_run(3, ev, 2);
    EXPECT_NEAR(greedy.fitness, 0.3 * 0.7, 1e-12);
    EXPECT_NEAR(best.fitness, 0.0, 1e-12);
    EXPECT_GT(greedy.fitness, best.fitness);
    EXPECT_EQ(best.plan.to_string(), "011");
    EXPECT_NEAR(dp_value(cg, greedy.plan), greedy.fitness, 1e-12);
}

TEST(Baselines, ExhaustiveCountsAndEdgeCases) {
    auto ev = table_evaluator(4);
    auto r = exhaustive_run(10, ev, 2);
    EXPECT_EQ(r.evaluations, 45u);
    EXPECT_EQ(ev.evaluations(), 45u);
    EXPECT_EQ(r.plan.budget(), 2u);
    auto none = exhaustive_run(5, ev, 0);
    EXPECT_EQ(none.evaluations, 1u);
    EXPECT_EQ(none.plan.budget(), 0u);
    EXPECT_THROW(exhaustive_run(40, ev, 20), ResourceError);
    EXPECT_THROW(exhaustive_run(3, ev, 4), ConfigError);
    EXPECT_EQ(binomial(10, 2), 45.0);
}

TEST(Baselines, FitnessEdgeCases) {
    auto cg = kernelize(fixtures::two_parallel());
    auto ev = make_exact_evaluator(cg);
    EXPECT_EQ(ev(BlockingPlan::from_string("11")), 0.0);
    EXPECT_NEAR(ev(BlockingPlan::from_string("00")), dp_value(cg, BlockingPlan(2)), 0.0);
    auto f3 = kernelize(fixtures::merging());
    EXPECT_EQ(make_exact_evaluator(f3)(BlockingPlan::from_string("1")), 0.0);
}

TEST(Snapshots, PopulationRoundTrip) {
    Population pop;
    pop.add(BlockingPlan::from_string("0101"), 0.123456789012345678);
    pop.add(BlockingPlan::from_string("1100"), 1.0 / 3.0);
    std::stringstream ss;
    write_population(ss, pop);
    auto back = read_population(ss);
    ASSERT_EQ(back.members.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.members[i].plan, pop.members[i].plan);
        EXPECT_EQ(back.members[i].fitness, pop.members[i].fitness);
    }
    std::istringstream bad("0101 0.1\n01 0.2\n");
    EXPECT_THROW(read_population(bad), ParseError);
}
