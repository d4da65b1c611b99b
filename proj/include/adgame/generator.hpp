#pragma once

#include <adgame/graph.hpp>

#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace adgame {

/// Knobs of the synthetic AD generator. Counts are per computer unless noted.
/// The defaults give roughly 1500 nodes and 3500 edges for 500 computers.
struct SyntheticParams {
    double users_per_computer = 1.0;
    double groups_per_computer = 0.958;
    std::size_t da_candidates = 7;        ///< absolute count
    std::size_t group_levels = 3;         ///< nesting depth of security groups
    double memberships_per_user = 3.4;    ///< user -MemberOf-> group
    double nesting_prob = 0.5;            ///< group -MemberOf-> group one level up
    double sessions_per_computer = 3.0;   ///< computer -HasSession-> user
    double admin_rights_per_computer = 0.12;  ///< group|user -AdminTo-> computer
    double user_admin_share = 0.3;        ///< share of AdminTo edges held by users
    std::size_t da_sessions = 2;          ///< per DA candidate: computer -HasSession-> DA
    std::size_t da_members = 1;           ///< per DA candidate: privileged group -MemberOf-> DA
    std::size_t privileged_members = 2;   ///< users directly in each privileged group
};

inline void validate(const SyntheticParams& p) {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    if (bad(p.users_per_computer) || p.users_per_computer <= 0.0)
        throw ConfigError("users_per_computer must be positive");
    if (bad(p.groups_per_computer) || p.groups_per_computer <= 0.0)
        throw ConfigError("groups_per_computer must be positive");
    if (p.da_candidates == 0) throw ConfigError("da_candidates must be at least 1");
    if (p.group_levels == 0) throw ConfigError("group_levels must be at least 1");
    if (bad(p.memberships_per_user) || bad(p.sessions_per_computer) || bad(p.admin_rights_per_computer))
        throw ConfigError("edge densities must be non-negative");
    if (bad(p.nesting_prob) || p.nesting_prob > 1.0 || bad(p.user_admin_share) || p.user_admin_share > 1.0)
        throw ConfigError("nesting_prob and user_admin_share must lie in [0,1]");
}

/// Raw (un-pruned) synthetic AD graph with HasSession, AdminTo and MemberOf
/// edges. Edge probabilities and blockable flags are left at zero.
inline AttackGraph generate_synthetic(std::size_t n_computers, std::uint64_t seed,
                                      const SyntheticParams& params = {}) {
    if (n_computers < 2) throw ConfigError("generate_synthetic needs at least 2 computers");
    validate(params);
    const auto n_users = static_cast<std::size_t>(std::llround(params.users_per_computer * n_computers));
    const auto n_groups = static_cast<std::size_t>(std::llround(params.groups_per_computer * n_computers));
    if (n_users == 0) throw ConfigError("parameters yield zero users");
    if (n_groups == 0) throw ConfigError("parameters yield zero groups");

    Rng rng = make_rng(seed, 0x67656eULL);
    AttackGraph g;
    std::vector<NodeId> computers, users, das;
    std::vector<std::vector<NodeId>> levels(params.group_levels);
    for (std::size_t i = 0; i < n_computers; ++i)
        computers.push_back(g.add_node(NodeKind::Computer, "C" + std::to_string(i)));
    for (std::size_t i = 0; i < n_users; ++i) users.push_back(g.add_node(NodeKind::User, "U" + std::to_string(i)));
    for (std::size_t i = 0; i < n_groups; ++i)
        levels[i % params.group_levels].push_back(g.add_node(NodeKind::Group, "G" + std::to_string(i)));
    std::vector<NodeId> privileged;
    for (std::size_t i = 0; i < params.da_candidates * params.da_members; ++i)
        privileged.push_back(g.add_node(NodeKind::Group, "P" + std::to_string(i)));
    for (std::size_t i = 0; i < params.da_candidates; ++i)
        das.push_back(g.add_node(NodeKind::DomainAdmin, "DA" + std::to_string(i)));

    std::vector<NodeId> groups;
    for (const auto& lvl : levels) groups.insert(groups.end(), lvl.begin(), lvl.end());

    std::set<std::pair<NodeId, NodeId>> seen;
    auto link = [&](NodeId s, NodeId d, EdgeKind kind) {
        if (s != d && seen.emplace(s, d).second) g.add_edge(s, d, kind);
    };
    auto pick = [&](const std::vector<NodeId>& v) { return v[uniform_index(rng, v.size())]; };

    for (NodeId u : users) {
        int m = 1 + poisson(rng, std::max(0.0, params.memberships_per_user - 1.0));
        for (int i = 0; i < m; ++i) link(u, pick(groups), EdgeKind::MemberOf);
    }
    for (std::size_t l = 0; l + 1 < levels.size(); ++l)
        for (NodeId grp : levels[l])
            if (!levels[l + 1].empty() && bernoulli(rng, params.nesting_prob))
                link(grp, pick(levels[l + 1]), EdgeKind::MemberOf);
    for (NodeId c : computers) {
        int s = poisson(rng, params.sessions_per_computer);
        for (int i = 0; i < s; ++i) link(c, pick(users), EdgeKind::HasSession);
        int a = poisson(rng, params.admin_rights_per_computer);
        for (int i = 0; i < a; ++i) {
            NodeId holder = bernoulli(rng, params.user_admin_share) ? pick(users) : pick(groups);
            link(holder, c, EdgeKind::AdminTo);
        }
    }
    for (std::size_t d = 0; d < das.size(); ++d) {
        for (std::size_t i = 0; i < params.da_sessions; ++i) link(pick(computers), das[d], EdgeKind::HasSession);
        for (std::size_t i = 0; i < params.da_members; ++i) {
            const NodeId pg = privileged[d * params.da_members + i];
            link(pg, das[d], EdgeKind::MemberOf);
            for (std::size_t u = 0; u < params.privileged_members; ++u) link(pick(users), pg, EdgeKind::MemberOf);
        }
    }
    return g;
}

}  // namespace adgame
