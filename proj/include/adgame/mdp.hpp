#pragma once

#include <adgame/kernel.hpp>
#include <adgame/plan.hpp>

#include <optional>
#include <string>
#include <vector>

namespace adgame {

enum class Status : std::uint8_t { Unattempted = 0, Successful = 1, Failed = 2 };

inline char to_char(Status s) {
    switch (s) {
        case Status::Unattempted: return '?';
        case Status::Successful: return 'S';
        case Status::Failed: return 'F';
    }
    return '?';
}

/// One status per NSP, in kernel NSP order.
class AttackerState {
public:
    AttackerState() = default;
    explicit AttackerState(std::size_t n_nsp) : status_(n_nsp, Status::Unattempted) {}
    explicit AttackerState(std::vector<Status> status) : status_(std::move(status)) {}

    /// Parses "S?F"-style strings.
    static AttackerState from_string(std::string_view s) {
        std::vector<Status> st;
        for (char c : s) {
            if (c == '?') st.push_back(Status::Unattempted);
            else if (c == 'S') st.push_back(Status::Successful);
            else if (c == 'F') st.push_back(Status::Failed);
            else throw ParseError("attacker state must use S, ? and F");
        }
        return AttackerState(std::move(st));
    }

    std::size_t size() const noexcept { return status_.size(); }
    Status operator[](std::size_t i) const { return status_[i]; }
    void set(std::size_t i, Status s) { status_.at(i) = s; }
    const std::vector<Status>& statuses() const noexcept { return status_; }

    std::string to_string() const {
        std::string s;
        for (Status st : status_) s.push_back(to_char(st));
        return s;
    }

    bool operator==(const AttackerState&) const = default;

private:
    std::vector<Status> status_;
};

struct AttackerStateHash {
    std::size_t operator()(const AttackerState& s) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (Status st : s.statuses()) h = (h ^ static_cast<std::uint8_t>(st)) * 1099511628211ULL;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

struct Outcome {
    AttackerState state;
    double prob = 0.0;
};

/// Non-detected outcomes of one attempt; the remaining mass is detection.
struct TransitionDistribution {
    std::vector<Outcome> outcomes;
    double detect_prob = 0.0;
};

inline void check_state(const CondensedGraph& cg, const AttackerState& s) {
    if (s.size() != cg.nsp_count())
        throw ContractViolation("attacker state has " + std::to_string(s.size()) + " coordinates, kernel has " +
                                std::to_string(cg.nsp_count()) + " NSPs");
}

/// NSPs whose block-worthy edge is blocked start out Failed.
inline AttackerState initial_state(const CondensedGraph& cg, const BlockingPlan& plan) {
    if (plan.size() != cg.bw_edges.size())
        throw ContractViolation("blocking plan length does not match the block-worthy edge count");
    AttackerState s(cg.nsp_count());
    for (std::size_t bw : plan.blocked())
        for (NspId i : cg.nsps_blocked_by(bw)) s.set(i, Status::Failed);
    return s;
}

inline AttackerState initial_state(const CondensedGraph& cg) { return AttackerState(cg.nsp_count()); }

/// Checkpoints: entry nodes plus terminals of successful NSPs.
inline std::vector<char> checkpoints(const CondensedGraph& cg, const AttackerState& s) {
    std::vector<char> secured(cg.graph_node_count, 0);
    for (NodeId e : cg.entry_nodes) secured[e] = 1;
    for (NspId i = 0; i < s.size(); ++i)
        if (s[i] == Status::Successful) secured[cg.nsps[i].terminal] = 1;
    return secured;
}

/// Unattempted NSPs whose source is a checkpoint, ascending.
inline std::vector<NspId> admissible_actions(const CondensedGraph& cg, const AttackerState& s) {
    check_state(cg, s);
    const auto secured = checkpoints(cg, s);
    std::vector<NspId> out;
    for (NspId i = 0; i < s.size(); ++i)
        if (s[i] == Status::Unattempted && secured[cg.nsps[i].source]) out.push_back(i);
    return out;
}

inline bool is_admissible(const CondensedGraph& cg, const AttackerState& s, NspId a) {
    if (a >= s.size() || s[a] != Status::Unattempted) return false;
    if (cg.is_entry(cg.nsps[a].source)) return true;
    for (NspId i = 0; i < s.size(); ++i)
        if (s[i] == Status::Successful && cg.nsps[i].terminal == cg.nsps[a].source) return true;
    return false;
}

/// 1 once a DA-terminating NSP succeeded; 0 when all of them failed or no
/// action is left; nullopt otherwise.
inline std::optional<double> terminal_value(const CondensedGraph& cg, const AttackerState& s) {
    check_state(cg, s);
    bool all_failed = true;
    for (NspId i = 0; i < s.size(); ++i) {
        if (!cg.leads_to_da(i)) continue;
        if (s[i] == Status::Successful) return 1.0;
        if (s[i] != Status::Failed) all_failed = false;
    }
    if (all_failed) return 0.0;
    if (admissible_actions(cg, s).empty()) return 0.0;
    return std::nullopt;
}

/// Outcome law of attempting NSP `a` edge by edge. Failure on an edge fails
/// every unattempted NSP that contains it; zero-mass outcomes are dropped.
inline TransitionDistribution transition(const CondensedGraph& cg, const AttackerState& s, NspId a) {
    check_state(cg, s);
    if (!is_admissible(cg, s, a))
        throw ContractViolation("NSP " + std::to_string(a) + " is not admissible in state " + s.to_string());

    TransitionDistribution dist;
    auto add = [&](AttackerState next, double p) {
        if (p <= 0.0) return;
        for (Outcome& o : dist.outcomes)
            if (o.state == next) {
                o.prob += p;
                return;
            }
        dist.outcomes.push_back(Outcome{std::move(next), p});
    };

    double mass = 1.0;
    for (EdgeId e : cg.nsps[a].edges) {
        const double pd = cg.p_detect[e], pf = cg.p_fail[e];
        if (pf > 0.0 && mass > 0.0) {
            AttackerState failed = s;
            for (NspId j : cg.edge_to_nsps.at(e))
                if (failed[j] == Status::Unattempted) failed.set(j, Status::Failed);
            add(std::move(failed), mass * pf);
        }
        dist.detect_prob += mass * pd;
        mass *= 1.0 - pd - pf;
    }
    AttackerState done = s;
    done.set(a, Status::Successful);
    add(std::move(done), mass);
    return dist;
}

}  // namespace adgame
