#pragma once

#include <adgame/adgame.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace fixtures {

using namespace adgame;

/// Graph with named nodes; the DA node is labelled "DA".
struct Named {
    AttackGraph g;
    std::map<std::string, NodeId> id;

    NodeId node(const std::string& name, NodeKind kind = NodeKind::User) {
        if (auto it = id.find(name); it != id.end()) return it->second;
        return id[name] = g.add_node(name == "DA" ? NodeKind::DomainAdmin : kind, name);
    }
    EdgeId edge(const std::string& a, const std::string& b, double pd, double pf, bool blockable = false) {
        NodeId s = node(a), d = node(b);
        return g.add_edge(s, d, EdgeKind::Generic, pd, pf, blockable);
    }
    void entries(std::vector<std::string> names) {
        std::vector<NodeId> ids;
        for (auto& n : names) ids.push_back(node(n));
        g.set_entry_nodes(ids);
    }
};

/// Edge id of a->b in `g` (first match by labels).
inline EdgeId find_edge(const AttackGraph& g, const std::string& a, const std::string& b) {
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (g.node(g.edge(e).src).label == a && g.node(g.edge(e).dst).label == b) return e;
    throw std::runtime_error("no edge " + a + "->" + b);
}

/// Node labels along an NSP, source first.
inline std::string nsp_path(const AttackGraph& g, const CondensedGraph& cg, NspId i) {
    std::string s = g.node(cg.nsps[i].source).label;
    for (EdgeId e : cg.nsps[i].edges) s += "," + g.node(g.edge(e).dst).label;
    return s;
}

/// Entry s; a, d and f split; blockable (b,c), (c,d), (a,e). d and f reach
/// the DA directly and through h.
inline AttackGraph branching() {
    Named n;
    for (const char* v : {"s", "a", "b", "c", "d", "e", "f", "h", "DA"}) n.node(v);
    n.edge("s", "a", 0.05, 0.1);
    n.edge("a", "b", 0.05, 0.1);
    n.edge("b", "c", 0.05, 0.1, true);
    n.edge("c", "d", 0.05, 0.1, true);
    n.edge("a", "e", 0.05, 0.1, true);
    n.edge("e", "f", 0.05, 0.1);
    n.edge("d", "DA", 0.1, 0.2);
    n.edge("d", "f", 0.1, 0.2);
    n.edge("f", "DA", 0.1, 0.2);
    n.edge("f", "h", 0.1, 0.2);
    n.edge("h", "DA", 0.1, 0.2);
    n.entries({"s"});
    n.g.set_da(n.id["DA"]);
    return n.g;
}

/// Entries A and E; A->B->C->D, E->C, D is the DA; every edge p_d 0.1, p_f 0.2.
inline AttackGraph merging() {
    Named n;
    for (const char* v : {"A", "B", "C", "DA", "E"}) n.node(v);
    n.edge("A", "B", 0.1, 0.2);
    n.edge("B", "C", 0.1, 0.2);
    n.edge("C", "DA", 0.1, 0.2, true);
    n.edge("E", "C", 0.1, 0.2);
    n.entries({"A", "E"});
    n.g.set_da(n.id["DA"]);
    return n.g;
}

/// Two parallel single-edge NSPs entry->DA, each p_d 0.1 and p_f 0.2, both
/// blockable. Optimal attacker value 0.7 + 0.2 * 0.7 = 0.84.
inline AttackGraph two_parallel() {
    Named n;
    n.node("s");
    n.node("DA");
    n.edge("s", "DA", 0.1, 0.2, true);
    n.edge("s", "DA", 0.1, 0.2, true);
    n.entries({"s"});
    n.g.set_da(n.id["DA"]);
    return n.g;
}

/// Entries s and t feed hub h, which has two parallel blockable edges to DA.
/// Greedy with k=2 first cuts the strong s->h edge (value 0.3 * 0.84) and is
/// left with 0.3 * 0.7 = 0.21; blocking both hub edges gives 0.
inline AttackGraph greedy_trap() {
    Named n;
    for (const char* v : {"s", "t", "h", "DA"}) n.node(v);
    n.edge("s", "h", 0.05, 0.05, true);
    n.edge("t", "h", 0.1, 0.6);
    n.edge("h", "DA", 0.1, 0.2, true);
    n.edge("h", "DA", 0.1, 0.2, true);
    n.entries({"s", "t"});
    n.g.set_da(n.id["DA"]);
    return n.g;
}

/// Random pruned instance with a DA, 1-3 entries and between `min_nsp` and
/// `max_nsp` NSPs. Retries internally until the constraints hold.
inline AttackGraph random_instance(std::uint64_t seed, std::size_t max_nsp = 10, std::size_t min_nsp = 2,
                                   std::size_t max_nodes = 9) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng = make_rng(seed, 1000 + attempt);
        const std::size_t n = 3 + uniform_index(rng, max_nodes - 2);
        AttackGraph g;
        for (std::size_t i = 0; i + 1 < n; ++i) g.add_node(NodeKind::User, "v" + std::to_string(i));
        const NodeId da = g.add_node(NodeKind::DomainAdmin, "DA");
        const std::size_t m = n + uniform_index(rng, n + 2);
        for (std::size_t i = 0; i < m; ++i) {
            NodeId a = static_cast<NodeId>(uniform_index(rng, n - 1));
            NodeId b = static_cast<NodeId>(uniform_index(rng, n));
            if (a == b) continue;
            double pd = 0.25 * uniform01(rng), pf = 0.35 * uniform01(rng);
            g.add_edge(a, b, EdgeKind::Generic, pd, pf, bernoulli(rng, 0.6));
        }
        const std::size_t n_entry = 1 + uniform_index(rng, 3);
        std::vector<NodeId> entries;
        for (NodeId v : sample_without_replacement(rng, n - 1, std::min(n_entry, n - 1)))
            entries.push_back(static_cast<NodeId>(v));
        g.set_entry_nodes(entries);
        g.set_da(da);
        try {
            AttackGraph p = prune(g);
            CondensedGraph cg = kernelize(p);
            if (cg.nsp_count() >= min_nsp && cg.nsp_count() <= max_nsp) return p;
        } catch (const Error&) {
        }
    }
}

// ---------------------------------------------------------------------------
// Brute-force expectimax. Deliberately shares nothing with the library's
// MDP code beyond the NSP list: admissibility, failure propagation and base
// cases are re-derived here, and nothing is cached.

inline double oracle_value(const CondensedGraph& cg, std::vector<char>& st);  // 'U','S','F'

inline bool oracle_terminal(const CondensedGraph& cg, const std::vector<char>& st, double& v) {
    bool any_open_da = false;
    for (std::size_t i = 0; i < cg.nsps.size(); ++i) {
        if (cg.nsps[i].terminal != cg.da) continue;
        if (st[i] == 'S') {
            v = 1.0;
            return true;
        }
        if (st[i] == 'U') any_open_da = true;
    }
    if (!any_open_da) {
        v = 0.0;
        return true;
    }
    return false;
}

inline double oracle_value(const CondensedGraph& cg, std::vector<char>& st) {
    double v;
    if (oracle_terminal(cg, st, v)) return v;
    std::vector<NodeId> reached(cg.entry_nodes.begin(), cg.entry_nodes.end());
    for (std::size_t i = 0; i < cg.nsps.size(); ++i)
        if (st[i] == 'S') reached.push_back(cg.nsps[i].terminal);
    double best = 0.0;
    for (std::size_t a = 0; a < cg.nsps.size(); ++a) {
        if (st[a] != 'U') continue;
        if (std::find(reached.begin(), reached.end(), cg.nsps[a].source) == reached.end()) continue;
        double pass = 1.0, q = 0.0;
        for (EdgeId e : cg.nsps[a].edges) {
            const double pf = cg.p_fail[e], pd = cg.p_detect[e];
            if (pf > 0.0) {
                std::vector<char> next = st;
                for (std::size_t j = 0; j < cg.nsps.size(); ++j) {
                    if (next[j] != 'U') continue;
                    const auto& es = cg.nsps[j].edges;
                    if (std::find(es.begin(), es.end(), e) != es.end()) next[j] = 'F';
                }
                q += pass * pf * oracle_value(cg, next);
            }
            pass *= 1.0 - pd - pf;
        }
        if (pass > 0.0) {
            std::vector<char> next = st;
            next[a] = 'S';
            q += pass * oracle_value(cg, next);
        }
        best = std::max(best, q);
    }
    return best;
}

inline double oracle_value(const CondensedGraph& cg, const BlockingPlan& plan) {
    std::vector<char> st(cg.nsps.size(), 'U');
    for (std::size_t i = 0; i < cg.nsps.size(); ++i) {
        const auto& bw = cg.nsps[i].block_worthy_edge;
        if (!bw) continue;
        for (std::size_t k = 0; k < plan.size(); ++k)
            if (plan[k] && cg.bw_edges[k] == *bw) st[i] = 'F';
    }
    return oracle_value(cg, st);
}

/// Independent comparator: recounts C(bw) without member j from scratch.
inline std::size_t brute_force_removal(const Population& pop, std::size_t newcomer) {
    const auto& ms = pop.members;
    bool strictly_best = true;
    for (std::size_t i = 0; i < ms.size(); ++i)
        if (i != newcomer && !(ms[newcomer].fitness < ms[i].fitness)) strictly_best = false;
    if (strictly_best) {
        std::size_t w = 0;
        for (std::size_t i = 0; i < ms.size(); ++i)
            if (ms[i].fitness > ms[w].fitness || (ms[i].fitness == ms[w].fitness && ms[i].birth < ms[w].birth)) w = i;
        return w;
    }
    std::vector<std::pair<std::vector<long>, std::uint64_t>> keys;
    for (std::size_t j = 0; j < ms.size(); ++j) {
        std::vector<long> c(ms[0].plan.size(), 0);
        for (std::size_t i = 0; i < ms.size(); ++i)
            if (i != j)
                for (std::size_t b = 0; b < c.size(); ++b) c[b] += ms[i].plan[b];
        std::sort(c.begin(), c.end(), std::greater<>());
        keys.emplace_back(c, ms[j].birth);
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < keys.size(); ++j)
        if (keys[j] < keys[best]) best = j;
    return best;
}

}  // namespace fixtures
