#pragma once

#include <adgame/mdp.hpp>
#include <adgame/mlp.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace adgame {

struct TrainingConfig {
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    std::size_t epochs_per_round = 500;
    double explore_prob = 0.5;
    std::size_t hidden_width = 256;
    std::size_t hidden_depth = 4;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size == 0 || !(learning_rate > 0.0)) throw ConfigError("batch_size and learning_rate must be positive");
        if (!(explore_prob >= 0.0 && explore_prob <= 1.0)) throw ConfigError("explore_prob must lie in [0,1]");
    }
};

/// S -> +1, ? -> 0, F -> -1.
inline Eigen::VectorXd encode_state(const AttackerState& s) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
        x[static_cast<Eigen::Index>(i)] = s[i] == Status::Successful ? 1.0 : s[i] == Status::Failed ? -1.0 : 0.0;
    }
    return x;
}

inline Eigen::MatrixXd encode_states(const std::vector<AttackerState>& states, std::size_t width) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = encode_state(states[j]);
    return x;
}

struct ActionValue {
    NspId action = 0;
    double value = 0.0;
};

/// Network approximation V(s; theta) of the attacker value on one kernel.
/// Base states are answered exactly and never sent through the network.
class ValueApproximator {
public:
    ValueApproximator(const CondensedGraph& cg, std::size_t width, std::size_t depth, std::uint64_t seed,
                      double learning_rate = 1e-3)
        : cg_(&cg), net_(cg.nsp_count(), width, depth, seed), adam_(learning_rate) {}

    ValueApproximator(const CondensedGraph& cg, Mlp net, double learning_rate = 1e-3)
        : cg_(&cg), net_(std::move(net)), adam_(learning_rate) {
        if (net_.input_size() != cg.nsp_count()) throw ContractViolation("network input width does not match the NSP count");
    }

    const CondensedGraph& kernel() const noexcept { return *cg_; }
    Mlp& net() noexcept { return net_; }
    const Mlp& net() const noexcept { return net_; }
    Adam& optimizer() noexcept { return adam_; }

    double predict(const AttackerState& s) const {
        if (auto tv = terminal_value(*cg_, s)) return *tv;
        return net_.forward_one(encode_state(s));
    }

    /// Raw network output, without the base-state short circuit.
    double raw(const AttackerState& s) const { return net_.forward_one(encode_state(s)); }

    std::vector<double> predict_batch(const std::vector<AttackerState>& states) const {
        std::vector<double> out(states.size());
        std::vector<AttackerState> open;
        std::vector<std::size_t> where;
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (auto tv = terminal_value(*cg_, states[i])) out[i] = *tv;
            else open.push_back(states[i]), where.push_back(i);
        }
        if (!open.empty()) {
            Eigen::RowVectorXd y = net_.forward(encode_states(open, cg_->nsp_count()));
            for (std::size_t j = 0; j < open.size(); ++j) out[where[j]] = y(static_cast<Eigen::Index>(j));
        }
        return out;
    }

    /// One-step backup sum_{s'} Pr(s'|s,a) V(s'; theta) for every admissible a.
    std::vector<ActionValue> action_values(const AttackerState& s) const {
        std::vector<ActionValue> out;
        std::vector<AttackerState> succ;
        std::vector<std::pair<std::size_t, double>> weight;  // (action slot, prob) per successor
        for (NspId a : admissible_actions(*cg_, s)) {
            out.push_back(ActionValue{a, 0.0});
            for (Outcome& o : transition(*cg_, s, a).outcomes) {
                succ.push_back(std::move(o.state));
                weight.emplace_back(out.size() - 1, o.prob);
            }
        }
        const auto v = predict_batch(succ);
        for (std::size_t i = 0; i < succ.size(); ++i) out[weight[i].first].value += weight[i].second * v[i];
        return out;
    }

    /// Bellman target max_a of `action_values`; terminal states give their exact value.
    double backup(const AttackerState& s) const {
        if (auto tv = terminal_value(*cg_, s)) return *tv;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& av : action_values(s)) best = std::max(best, av.value);
        return best;
    }

    /// Greedy action under the network; ties go to the smallest NSP id.
    std::optional<NspId> greedy_action(const AttackerState& s) const {
        std::optional<NspId> best;
        double best_q = -std::numeric_limits<double>::infinity();
        for (const auto& av : action_values(s))
            if (av.value > best_q) best_q = av.value, best = av.action;
        return best;
    }

private:
    const CondensedGraph* cg_;
    Mlp net_;
    Adam adam_;
};

/// Samples a trajectory from `s0`: greedy under the network with probability
/// 1 - explore_prob, otherwise a uniform admissible action; the next state is
/// drawn from the full outcome law, detection ending the trajectory.
inline std::vector<AttackerState> rollout(const ValueApproximator& approx, const AttackerState& s0, double explore_prob,
                                          Rng& rng) {
    const CondensedGraph& cg = approx.kernel();
    std::vector<AttackerState> visited{s0};
    AttackerState s = s0;
    while (!terminal_value(cg, s)) {
        NspId a;
        if (bernoulli(rng, explore_prob)) {
            const auto actions = admissible_actions(cg, s);
            a = actions[uniform_index(rng, actions.size())];
        } else {
            a = *approx.greedy_action(s);
        }
        auto dist = transition(cg, s, a);
        double u = uniform01(rng);
        const Outcome* next = nullptr;
        for (const Outcome& o : dist.outcomes) {
            if (u < o.prob) {
                next = &o;
                break;
            }
            u -= o.prob;
        }
        if (!next) break;  // detected
        s = next->state;
        visited.push_back(s);
    }
    return visited;
}

struct TrainStats {
    std::vector<double> epoch_loss;  ///< one entry per epoch that had trainable states
    std::size_t skipped_epochs = 0;  ///< plans whose initial state was already terminal
    bool diverged = false;

    double tail_mean(std::size_t n) const {
        if (epoch_loss.empty()) return 0.0;
        n = std::min(n, epoch_loss.size());
        double s = 0.0;
        for (std::size_t i = epoch_loss.size() - n; i < epoch_loss.size(); ++i) s += epoch_loss[i];
        return s / static_cast<double>(n);
    }
};

/// One training round. Each epoch draws a plan, rolls out from its initial
/// state until `batch_size` non-terminal states are collected, and takes one
/// optimizer step on the squared error against fixed Bellman targets.
inline TrainStats train_round(ValueApproximator& approx, const std::vector<AttackerState>& initial_states,
                              const TrainingConfig& config, Rng& rng) {
    config.validate();
    if (initial_states.empty()) throw ContractViolation("train_round needs at least one initial state");
    const CondensedGraph& cg = approx.kernel();
    TrainStats stats;
    Eigen::VectorXd grad;
    for (std::size_t epoch = 0; epoch < config.epochs_per_round; ++epoch) {
        const AttackerState& s0 = initial_states[uniform_index(rng, initial_states.size())];
        if (terminal_value(cg, s0)) {
            ++stats.skipped_epochs;
            continue;
        }
        std::vector<AttackerState> batch;
        while (batch.size() < config.batch_size) {
            for (auto& st : rollout(approx, s0, config.explore_prob, rng)) {
                if (batch.size() == config.batch_size) break;
                if (!terminal_value(cg, st)) batch.push_back(std::move(st));
            }
        }
        Eigen::RowVectorXd target(static_cast<Eigen::Index>(batch.size()));
        for (std::size_t i = 0; i < batch.size(); ++i) target(static_cast<Eigen::Index>(i)) = approx.backup(batch[i]);
        const double loss = approx.net().loss_and_gradient(encode_states(batch, cg.nsp_count()), target, grad);
        if (!std::isfinite(loss) || !grad.allFinite()) {
            stats.diverged = true;
            break;
        }
        approx.optimizer().step(approx.net().params(), grad);
        stats.epoch_loss.push_back(loss);
    }
    return stats;
}

inline TrainStats train_round(ValueApproximator& approx, const std::vector<BlockingPlan>& plans,
                              const TrainingConfig& config, Rng& rng) {
    std::vector<AttackerState> starts;
    starts.reserve(plans.size());
    for (const auto& p : plans) starts.push_back(initial_state(approx.kernel(), p));
    return train_round(approx, starts, config, rng);
}

}  // namespace adgame
