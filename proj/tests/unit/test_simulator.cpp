#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace adgame;

TEST(Simulator, TwoParallelRate) {
    auto cg = kernelize(fixtures::two_parallel());
    auto r = simulate(cg, BlockingPlan(2), make_exact_policy(cg), 1'000'000, 7, 4);
    EXPECT_EQ(r.runs, 1'000'000u);
    EXPECT_LE(std::abs(r.success_rate - 0.84), 3.0 * r.std_error) << r.success_rate;
    auto blocked = simulate(cg, BlockingPlan::from_string("11"), make_exact_policy(cg), 1000, 7);
    EXPECT_EQ(blocked.successes, 0u);
}

TEST(Simulator, WorkerCountDoesNotChangeTheResult) {
    auto cg = kernelize(fixtures::branching());
    auto solver = std::make_shared<ExactSolver>(cg);
    const auto plan = BlockingPlan::from_string("01");
    auto one = simulate(cg, plan, make_exact_policy(solver), 20001, 3, 1);
    for (std::size_t w : {3u, 4u}) {
        auto many = simulate(cg, plan, make_exact_policy(solver), 20001, 3, w);
        EXPECT_EQ(many.successes, one.successes) << w << " workers";
    }
    auto g = fixtures::branching();
    auto a = simulate_on_original(g, cg, plan, make_exact_policy(solver), 20001, 3, 1);
    auto b = simulate_on_original(g, cg, plan, make_exact_policy(solver), 20001, 3, 4);
    EXPECT_EQ(a.successes, b.successes);
}

TEST(Simulator, OriginalGraphAgreesWithDp) {
    auto g = fixtures::branching();
    auto cg = kernelize(g);
    ASSERT_EQ(cg.bw_edges[0], fixtures::find_edge(g, "c", "d"));
    for (const char* p : {"00", "10", "01"}) {
        const auto plan = BlockingPlan::from_string(p);
        const double v = dp_value(cg, plan);
        auto r = simulate_on_original(g, cg, plan, make_exact_policy(cg), 1'000'000, 11, 4);
        const double se = std::sqrt(v * (1 - v) / 1e6);
        EXPECT_LE(std::abs(r.success_rate - v), 4.0 * se + 1e-12) << p << " dp " << v << " mc " << r.success_rate;
    }
}

TEST(Simulator, ApproximatorPolicyRuns) {
    auto cg = kernelize(fixtures::merging());
    ValueApproximator approx(cg, 8, 1, 2);
    auto r = simulate(cg, BlockingPlan(1), make_approximator_policy(approx), 5000, 1);
    EXPECT_GT(r.success_rate, 0.0);
    EXPECT_LT(r.success_rate, 1.0);
}

TEST(Simulator, RejectsBadPoliciesAndArguments) {
    auto cg = kernelize(fixtures::branching());
    PolicyHandle lazy;
    lazy.choose = [](const AttackerState&) { return std::optional<NspId>{}; };
    EXPECT_THROW(simulate(cg, BlockingPlan(2), lazy, 10, 1), ContractViolation);
    PolicyHandle deep;
    deep.choose = [&](const AttackerState&) {
        for (NspId i = 0; i < cg.nsp_count(); ++i)
            if (!cg.is_entry(cg.nsps[i].source)) return std::optional<NspId>{i};
        return std::optional<NspId>{};
    };
    EXPECT_THROW(simulate(cg, BlockingPlan(2), deep, 10, 1, 2), ContractViolation);
    EXPECT_THROW(simulate(cg, BlockingPlan(2), make_exact_policy(cg), 0, 1), ConfigError);
    EXPECT_THROW(simulate_on_original(fixtures::branching(), cg, BlockingPlan(3), make_exact_policy(cg), 5, 1),
                 ContractViolation);
}

TEST(Simulator, ReportCsv) {
    auto r = SimulationReport::from_counts(4, 1, 0.0);
    EXPECT_EQ(r.success_rate, 0.25);
    EXPECT_DOUBLE_EQ(r.std_error, std::sqrt(0.25 * 0.75 / 4));
    std::ostringstream os;
    write_report_csv_header(os);
    write_report_csv(os, "10", "exact", r);
    EXPECT_EQ(os.str(), "plan,evaluator,runs,rate,std_error,seconds\n10,exact,4,0.25," + format_double(r.std_error) +
                            ",0.000\n");
}
