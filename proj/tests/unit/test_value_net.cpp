#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace adgame;

TEST(ValueNet, StateEncoding) {
    auto x = encode_state(AttackerState::from_string("S?F"));
    EXPECT_EQ(x[0], 1.0);
    EXPECT_EQ(x[1], 0.0);
    EXPECT_EQ(x[2], -1.0);
}

TEST(ValueNet, OutputsAreProbabilities) {
    Mlp net(5, 8, 3, 1);
    Rng rng = make_rng(2);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 40) * 3.0;
    auto y = net.forward(x);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        EXPECT_GT(y(i), 0.0);
        EXPECT_LT(y(i), 1.0);
    }
    EXPECT_EQ(net.param_count(), (5 * 8 + 8) + 2 * (8 * 8 + 8) + (8 + 1));
}

TEST(ValueNet, GradientMatchesFiniteDifferences) {
    for (std::size_t depth : {1u, 2u, 3u}) {
        for (std::size_t width : {4u, 8u}) {
            Mlp net(6, width, depth, 10 + depth * width);
            Rng rng = make_rng(depth * 31 + width);
            Eigen::MatrixXd x(6, 5);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<double>(uniform_index(rng, 3)) - 1.0;
            Eigen::RowVectorXd t(5);
            for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = uniform01(rng);
            Eigen::VectorXd grad;
            net.loss_and_gradient(x, t, grad);
            const double h = 1e-6;
            Eigen::VectorXd dummy;
            for (Eigen::Index p = 0; p < net.params().size(); ++p) {
                const double keep = net.params()[p];
                net.params()[p] = keep + h;
                const double up = net.loss_and_gradient(x, t, dummy);
                net.params()[p] = keep - h;
                const double down = net.loss_and_gradient(x, t, dummy);
                net.params()[p] = keep;
                const double numeric = (up - down) / (2 * h);
                const double denom = std::max(std::abs(numeric) + std::abs(grad[p]), 1e-7);
                EXPECT_LE(std::abs(numeric - grad[p]) / denom, 1e-4)
                    << "depth " << depth << " width " << width << " param " << p;
            }
        }
    }
}

TEST(ValueNet, CheckpointRoundTrip) {
    Mlp net(7, 8, 2, 3);
    std::stringstream ss;
    write_checkpoint(ss, net, {3, 12});
    CheckpointMeta meta;
    Mlp back = read_checkpoint(ss, &meta);
    EXPECT_EQ(back, net);
    EXPECT_EQ(meta.seed, 3u);
    EXPECT_EQ(meta.round, 12u);

    std::string bytes;
    {
        std::stringstream again;
        write_checkpoint(again, net, {3, 12});
        bytes = again.str();
    }
    EXPECT_EQ(bytes.substr(0, 4), "ADVN");
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_checkpoint(truncated), ParseError);
    std::stringstream bad("XXXX" + bytes.substr(4));
    EXPECT_THROW(read_checkpoint(bad), ParseError);
}

TEST(ValueNet, BaseStatesBypassTheNetwork) {
    auto cg = kernelize(fixtures::merging());
    ValueApproximator approx(cg, 8, 2, 1);
    EXPECT_EQ(approx.predict(AttackerState::from_string("FF")), 0.0);
    EXPECT_EQ(approx.predict(AttackerState::from_string("?S")), 1.0);
    const double raw = approx.raw(AttackerState::from_string("??"));
    EXPECT_EQ(approx.predict(AttackerState::from_string("??")), raw);
    auto batch = approx.predict_batch({AttackerState::from_string("FF"), AttackerState::from_string("??")});
    EXPECT_EQ(batch[0], 0.0);
    EXPECT_DOUBLE_EQ(batch[1], raw);
}

TEST(ValueNet, RolloutFollowsTheTransitionLaw) {
    auto cg = kernelize(fixtures::two_parallel());
    ValueApproximator approx(cg, 8, 1, 4);
    Rng rng = make_rng(77);
    const int n = 10000;
    int failed_first = 0, f_then_open = 0, detected_first = 0;
    for (int i = 0; i < n; ++i) {
        auto traj = rollout(approx, initial_state(cg), 1.0, rng);
        ASSERT_GE(traj.size(), 1u);
        if (traj.size() < 2) {
            ++detected_first;
            continue;
        }
        const auto s = traj[1].to_string();
        failed_first += (s == "F?" || s == "?F");
        f_then_open += s == "F?";
    }
    auto within = [&](int count, double p) {
        return std::abs(count / double(n) - p) <= 3.0 * std::sqrt(p * (1 - p) / n);
    };
    EXPECT_TRUE(within(failed_first, 0.2)) << failed_first;
    EXPECT_TRUE(within(f_then_open, 0.1)) << f_then_open;
    EXPECT_TRUE(within(detected_first, 0.1)) << detected_first;
}

TEST(ValueNet, GreedyActionTiesGoToSmallestId) {
    auto cg = kernelize(fixtures::two_parallel());
    ValueApproximator approx(cg, 8, 1, 4);
    // the two NSPs are symmetric, so their one-step backups tie exactly
    auto av = approx.action_values(initial_state(cg));
    ASSERT_EQ(av.size(), 2u);
    if (av[0].value == av[1].value) EXPECT_EQ(approx.greedy_action(initial_state(cg)), NspId{0});
    EXPECT_FALSE(approx.greedy_action(AttackerState::from_string("FF")));
}

TEST(ValueNet, TrainRoundIsDeterministic) {
    auto cg = kernelize(fixtures::branching());
    TrainingConfig cfg;
    cfg.epochs_per_round = 30;
    std::vector<BlockingPlan> plans{BlockingPlan::from_string("00"), BlockingPlan::from_string("10"),
                                    BlockingPlan::from_string("01")};
    auto run = [&] {
        ValueApproximator approx(cg, 16, 2, 5);
        Rng rng = make_rng(9);
        auto stats = train_round(approx, plans, cfg, rng);
        return std::make_pair(approx.net(), stats.epoch_loss);
    };
    auto a = run(), b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    EXPECT_EQ(a.second.size(), 30u);
}

TEST(ValueNet, TrainingApproachesTheExactValue) {
    auto cg = kernelize(fixtures::merging());
    ValueApproximator approx(cg, 16, 2, 3, 5e-3);
    TrainingConfig cfg;
    cfg.epochs_per_round = 300;
    Rng rng = make_rng(1);
    std::vector<AttackerState> starts{initial_state(cg)};
    TrainStats last;
    for (int r = 0; r < 4; ++r) last = train_round(approx, starts, cfg, rng);
    EXPECT_FALSE(last.diverged);
    ExactSolver solver(cg);
    for (const char* s : {"??", "F?", "?F"})
        EXPECT_NEAR(approx.predict(AttackerState::from_string(s)), solver.value(AttackerState::from_string(s)), 0.05) << s;
}

TEST(ValueNet, TrainRoundSkipsTerminalStartsAndValidates) {
    auto cg = kernelize(fixtures::merging());
    ValueApproximator approx(cg, 8, 1, 3);
    TrainingConfig cfg;
    cfg.epochs_per_round = 10;
    Rng rng = make_rng(1);
    auto st = train_round(approx, std::vector<AttackerState>{AttackerState::from_string("FF")}, cfg, rng);
    EXPECT_EQ(st.skipped_epochs, 10u);
    EXPECT_TRUE(st.epoch_loss.empty());
    cfg.explore_prob = 2.0;
    EXPECT_THROW(train_round(approx, std::vector<AttackerState>{initial_state(cg)}, cfg, rng), ConfigError);
    cfg.explore_prob = 0.5;
    EXPECT_THROW(train_round(approx, std::vector<AttackerState>{}, cfg, rng), ContractViolation);
}
