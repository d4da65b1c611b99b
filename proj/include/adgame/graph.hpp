#pragma once

#include <adgame/error.hpp>
#include <adgame/random.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adgame {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

enum class NodeKind : std::uint8_t { Computer, User, Group, DomainAdmin };
enum class EdgeKind : std::uint8_t { HasSession, AdminTo, MemberOf, Generic };

inline std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Computer: return "computer";
        case NodeKind::User: return "user";
        case NodeKind::Group: return "group";
        case NodeKind::DomainAdmin: return "da";
    }
    return "?";
}

inline std::string_view to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::HasSession: return "HasSession";
        case EdgeKind::AdminTo: return "AdminTo";
        case EdgeKind::MemberOf: return "MemberOf";
        case EdgeKind::Generic: return "generic";
    }
    return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
    if (s == "computer") return NodeKind::Computer;
    if (s == "user") return NodeKind::User;
    if (s == "group") return NodeKind::Group;
    if (s == "da") return NodeKind::DomainAdmin;
    return std::nullopt;
}

inline std::optional<EdgeKind> parse_edge_kind(std::string_view s) {
    if (s == "HasSession") return EdgeKind::HasSession;
    if (s == "AdminTo") return EdgeKind::AdminTo;
    if (s == "MemberOf") return EdgeKind::MemberOf;
    if (s == "generic") return EdgeKind::Generic;
    return std::nullopt;
}

struct Node {
    NodeKind kind = NodeKind::User;
    std::string label;

    bool operator==(const Node&) const = default;
};

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    EdgeKind kind = EdgeKind::Generic;
    double p_detect = 0.0;
    double p_fail = 0.0;
    bool blockable = false;

    double p_success() const noexcept { return 1.0 - p_detect - p_fail; }

    bool operator==(const Edge&) const = default;
};

inline bool in_simplex(double p_detect, double p_fail) noexcept {
    return p_detect >= 0.0 && p_fail >= 0.0 && p_detect + p_fail <= 1.0;
}

/// Directed AD attack graph. Node and edge ids are dense indices.
///
/// A raw graph may hold several nodes of kind `DomainAdmin`; after `prune`
/// they are merged into the single node reported by `da()`.
class AttackGraph {
public:
    NodeId add_node(NodeKind kind, std::string label = {}) {
        nodes_.push_back(Node{kind, std::move(label)});
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    EdgeId add_edge(NodeId src, NodeId dst, EdgeKind kind = EdgeKind::Generic, double p_detect = 0.0,
                    double p_fail = 0.0, bool blockable = false) {
        if (src >= nodes_.size() || dst >= nodes_.size())
            throw ValidationError("edge endpoint out of range");
        edges_.push_back(Edge{src, dst, kind, p_detect, p_fail, blockable});
        return static_cast<EdgeId>(edges_.size() - 1);
    }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    const Edge& edge(EdgeId id) const { return edges_.at(id); }
    Edge& edge(EdgeId id) { return edges_.at(id); }

    /// Sorted, duplicate free.
    const std::vector<NodeId>& entry_nodes() const noexcept { return entries_; }
    bool is_entry(NodeId id) const { return std::binary_search(entries_.begin(), entries_.end(), id); }

    void set_entry_nodes(std::vector<NodeId> entries) {
        std::sort(entries.begin(), entries.end());
        entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
        for (NodeId e : entries)
            if (e >= nodes_.size()) throw ValidationError("entry node out of range");
        entries_ = std::move(entries);
    }

    std::optional<NodeId> da() const noexcept { return da_; }
    void set_da(std::optional<NodeId> da) {
        if (da && *da >= nodes_.size()) throw ValidationError("DA node out of range");
        da_ = da;
    }

    NodeId require_da() const {
        if (!da_) throw ValidationError("graph has no merged DA node; run prune first");
        return *da_;
    }

    std::vector<NodeId> da_candidates() const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].kind == NodeKind::DomainAdmin || (da_ && *da_ == i)) out.push_back(i);
        return out;
    }

    bool operator==(const AttackGraph&) const = default;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<NodeId> entries_;
    std::optional<NodeId> da_;
};

/// Out/in edge lists. Out lists are ordered by (head node, edge id).
struct Adjacency {
    std::vector<std::vector<EdgeId>> out;
    std::vector<std::vector<EdgeId>> in;

    explicit Adjacency(const AttackGraph& g) : out(g.node_count()), in(g.node_count()) {
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            out[g.edge(e).src].push_back(e);
            in[g.edge(e).dst].push_back(e);
        }
        for (auto& list : out)
            std::stable_sort(list.begin(), list.end(),
                             [&](EdgeId a, EdgeId b) { return g.edge(a).dst < g.edge(b).dst; });
    }
};

/// Checks the probability simplex on every edge and the entry/DA bookkeeping.
inline void validate(const AttackGraph& g) {
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edge(e);
        if (!std::isfinite(edge.p_detect) || !std::isfinite(edge.p_fail) ||
            !in_simplex(edge.p_detect, edge.p_fail))
            throw ValidationError("edge " + std::to_string(e) + " violates p_d, p_f >= 0 and p_d + p_f <= 1");
    }
    if (auto da = g.da()) {
        if (g.is_entry(*da)) throw ValidationError("DA node is also an entry node");
    }
}

inline constexpr std::uint32_t kUnreachable = 0xffffffffu;

/// Minimum hop count from every node to the DA (`kUnreachable` if none).
inline std::vector<std::uint32_t> hop_distances_to_da(const AttackGraph& g) {
    const NodeId da = g.require_da();
    std::vector<std::uint32_t> dist(g.node_count(), kUnreachable);
    Adjacency adj(g);
    std::deque<NodeId> queue{da};
    dist[da] = 0;
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (EdgeId e : adj.in[v]) {
            NodeId u = g.edge(e).src;
            if (dist[u] == kUnreachable) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

namespace detail {

inline std::vector<char> reach_backward(std::size_t n, const std::vector<Edge>& edges,
                                        const std::vector<char>& alive, NodeId target) {
    std::vector<std::vector<NodeId>> preds(n);
    for (const Edge& e : edges)
        if (alive[e.src] && alive[e.dst]) preds[e.dst].push_back(e.src);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{target};
    seen[target] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId u : preds[v])
            if (!seen[u]) seen[u] = 1, stack.push_back(u);
    }
    return seen;
}

inline std::vector<char> reach_forward(std::size_t n, const std::vector<Edge>& edges,
                                       const std::vector<char>& alive, const std::vector<NodeId>& from) {
    std::vector<std::vector<NodeId>> succ(n);
    for (const Edge& e : edges)
        if (alive[e.src] && alive[e.dst]) succ[e.src].push_back(e.dst);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack;
    for (NodeId f : from)
        if (alive[f] && !seen[f]) seen[f] = 1, stack.push_back(f);
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : succ[v])
            if (!seen[w]) seen[w] = 1, stack.push_back(w);
    }
    return seen;
}

}  // namespace detail

/// Merges every DA candidate into one DA, drops DA out-edges, edges into
/// entry nodes and self loops, then removes (to a fixpoint) nodes that cannot
/// reach the DA and, once entry nodes are set, nodes unreachable from them.
/// Entry nodes and the DA are never removed. Ids are compacted preserving order.
inline AttackGraph prune(const AttackGraph& g) {
    const std::vector<NodeId> candidates = g.da_candidates();
    if (candidates.empty()) throw ValidationError("graph has no DA candidate node");
    const NodeId target = g.da() ? *g.da() : candidates.front();
    if (g.is_entry(target)) throw ValidationError("DA node is also an entry node");

    const std::size_t n = g.node_count();
    std::vector<char> is_candidate(n, 0);
    for (NodeId c : candidates) is_candidate[c] = 1;
    auto redirect = [&](NodeId v) { return is_candidate[v] ? target : v; };

    std::vector<Edge> edges;
    edges.reserve(g.edge_count());
    for (const Edge& e : g.edges()) {
        Edge r = e;
        r.src = redirect(e.src);
        r.dst = redirect(e.dst);
        if (r.src == target || r.src == r.dst || g.is_entry(r.dst)) continue;
        edges.push_back(r);
    }

    std::vector<char> alive(n, 1);
    for (NodeId c : candidates)
        if (c != target) alive[c] = 0;

    const auto& entries = g.entry_nodes();
    for (bool changed = true; changed;) {
        changed = false;
        auto to_da = detail::reach_backward(n, edges, alive, target);
        std::vector<char> from_entries;
        if (!entries.empty()) from_entries = detail::reach_forward(n, edges, alive, entries);
        for (NodeId v = 0; v < n; ++v) {
            if (!alive[v] || v == target || g.is_entry(v)) continue;
            bool keep = to_da[v] && (entries.empty() || from_entries[v]);
            if (!keep) alive[v] = 0, changed = true;
        }
    }

    {
        auto to_da = detail::reach_backward(n, edges, alive, target);
        bool any = false;
        if (entries.empty()) {
            for (NodeId v = 0; v < n; ++v) any = any || (alive[v] && v != target && to_da[v]);
        } else {
            for (NodeId e : entries) any = any || to_da[e];
        }
        if (!any) throw EmptyGameError(entries.empty() ? "no node can reach the DA"
                                                       : "no entry node can reach the DA");
    }

    AttackGraph out;
    std::vector<NodeId> remap(n, kUnreachable);
    for (NodeId v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        Node node = g.node(v);
        if (v == target) node.kind = NodeKind::DomainAdmin;
        remap[v] = out.add_node(node.kind, node.label);
    }
    for (const Edge& e : edges) {
        if (!alive[e.src] || !alive[e.dst]) continue;
        out.add_edge(remap[e.src], remap[e.dst], e.kind, e.p_detect, e.p_fail, e.blockable);
    }
    std::vector<NodeId> new_entries;
    for (NodeId e : entries) new_entries.push_back(remap[e]);
    out.set_entry_nodes(std::move(new_entries));
    out.set_da(remap[target]);
    return out;
}

struct EntrySelection {
    std::vector<NodeId> nodes;   ///< sorted
    std::size_t pool_used = 0;   ///< size of the farthest-node pool actually drawn from
    bool pool_shrunk = false;    ///< fewer than `pool_size` nodes had a finite distance
};

/// Draws `n_entry` nodes uniformly from the `pool_size` nodes farthest (in
/// hops) from the DA. Ties at the pool boundary go to the smaller NodeId.
inline EntrySelection select_entry_nodes(const AttackGraph& g, std::size_t pool_size, std::size_t n_entry,
                                         std::uint64_t seed) {
    if (n_entry < 1 || pool_size < n_entry)
        throw ConfigError("entry selection needs pool_size >= n_entry >= 1");
    const auto dist = hop_distances_to_da(g);
    std::vector<NodeId> candidates;
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (dist[v] != kUnreachable && dist[v] > 0) candidates.push_back(v);
    if (candidates.empty()) throw EmptyGameError("no node can reach the DA");
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](NodeId a, NodeId b) { return dist[a] > dist[b]; });

    EntrySelection sel;
    sel.pool_shrunk = candidates.size() < pool_size;
    sel.pool_used = std::min(pool_size, candidates.size());
    candidates.resize(sel.pool_used);
    Rng rng = make_rng(seed, 0x656e747279ULL);
    sel.nodes = sample_from(rng, candidates, std::min(n_entry, candidates.size()));
    std::sort(sel.nodes.begin(), sel.nodes.end());
    return sel;
}

inline AttackGraph with_entry_nodes(AttackGraph g, std::vector<NodeId> entries) {
    g.set_entry_nodes(std::move(entries));
    return g;
}

/// Probability that each edge is made blockable: (1 + hops from head to DA)
/// divided by the maximum of that quantity over all edges.
inline std::vector<double> blockable_probabilities(const AttackGraph& g) {
    const auto dist = hop_distances_to_da(g);
    std::vector<double> hop(g.edge_count(), 0.0);
    double max_hop = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto d = dist[g.edge(e).dst];
        if (d == kUnreachable) continue;
        hop[e] = 1.0 + d;
        max_hop = std::max(max_hop, hop[e]);
    }
    if (max_hop > 0.0)
        for (double& h : hop) h /= max_hop;
    return hop;
}

inline AttackGraph assign_blockable(AttackGraph g, std::uint64_t seed) {
    const auto prob = blockable_probabilities(g);
    Rng rng = make_rng(seed, 0x626c6f636bULL);
    for (EdgeId e = 0; e < g.edge_count(); ++e) g.edge(e).blockable = bernoulli(rng, prob[e]);
    return g;
}

/// Joint law of an edge's (p_d, p_f).
struct ProbabilityDistribution {
    enum class Kind { Independent, PositiveCorrelation, NegativeCorrelation };

    Kind kind = Kind::Independent;
    double lower = 0.0;                       // Independent: uniform bounds
    double upper = 0.2;
    std::array<double, 2> mean{0.1, 0.1};     // correlated: bivariate normal
    std::array<double, 3> cov{0.05 * 0.05, 0.5 * 0.05 * 0.05, 0.05 * 0.05};  // (var_d, cov, var_f)

    static ProbabilityDistribution independent() { return {}; }
    static ProbabilityDistribution positive() {
        ProbabilityDistribution d;
        d.kind = Kind::PositiveCorrelation;
        return d;
    }
    static ProbabilityDistribution negative() {
        ProbabilityDistribution d;
        d.kind = Kind::NegativeCorrelation;
        d.cov[1] = -0.5 * 0.05 * 0.05;
        return d;
    }
};

inline std::string_view to_string(ProbabilityDistribution::Kind k) {
    switch (k) {
        case ProbabilityDistribution::Kind::Independent: return "independent";
        case ProbabilityDistribution::Kind::PositiveCorrelation: return "positive";
        case ProbabilityDistribution::Kind::NegativeCorrelation: return "negative";
    }
    return "?";
}

inline std::optional<ProbabilityDistribution> parse_distribution(std::string_view s) {
    if (s == "independent") return ProbabilityDistribution::independent();
    if (s == "positive") return ProbabilityDistribution::positive();
    if (s == "negative") return ProbabilityDistribution::negative();
    return std::nullopt;
}

/// Coordinate-wise clamp into [0,1], then rescale onto p_d + p_f <= 1.
inline std::pair<double, double> clamp_to_simplex(double p_detect, double p_fail) {
    p_detect = std::clamp(p_detect, 0.0, 1.0);
    p_fail = std::clamp(p_fail, 0.0, 1.0);
    if (double sum = p_detect + p_fail; sum > 1.0) {
        p_detect /= sum;
        p_fail = std::min(p_fail / sum, 1.0 - p_detect);
    }
    return {p_detect, p_fail};
}

inline AttackGraph sample_edge_probabilities(AttackGraph g, const ProbabilityDistribution& dist,
                                             std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x70726f62ULL);
    std::uniform_real_distribution<double> uni(dist.lower, dist.upper);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Cholesky factor of the 2x2 covariance
    const double l11 = std::sqrt(dist.cov[0]);
    const double l21 = dist.cov[1] / l11;
    const double l22 = std::sqrt(std::max(0.0, dist.cov[2] - l21 * l21));
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        double pd, pf;
        if (dist.kind == ProbabilityDistribution::Kind::Independent) {
            pd = uni(rng);
            pf = uni(rng);
        } else {
            double z1 = normal(rng);
            double z2 = normal(rng);
            pd = dist.mean[0] + l11 * z1;
            pf = dist.mean[1] + l21 * z1 + l22 * z2;
        }
        auto [cd, cf] = clamp_to_simplex(pd, pf);
        g.edge(e).p_detect = cd;
        g.edge(e).p_fail = cf;
    }
    return g;
}

}  // namespace adgame
