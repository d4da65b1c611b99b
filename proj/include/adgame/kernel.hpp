#pragma once

#include <adgame/graph.hpp>

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace adgame {

using NspId = std::uint32_t;

/// Non-splitting path: from an entry or splitting node along sole successors
/// until the DA or the next splitting node.
struct Nsp {
    NspId id = 0;
    NodeId source = 0;
    NodeId terminal = 0;
    std::vector<EdgeId> edges;
    bool blockable = false;
    std::optional<EdgeId> block_worthy_edge;  ///< furthermost blockable edge

    bool operator==(const Nsp&) const = default;
};

/// Kernel of a pruned attack graph.
struct CondensedGraph {
    std::vector<Nsp> nsps;  ///< ordered by (source, successor, edge id)
    std::vector<NodeId> entry_nodes;
    std::vector<NodeId> split_nodes;
    NodeId da = 0;
    std::vector<EdgeId> bw_edges;  ///< sorted; a blocking plan indexes into this
    std::map<EdgeId, std::vector<NspId>> edge_to_nsps;
    std::vector<double> p_detect;  ///< per original edge
    std::vector<double> p_fail;    ///< per original edge
    std::size_t feedback_edges = 0;  ///< h, summed over weakly connected components
    std::size_t graph_node_count = 0;

    std::size_t nsp_count() const noexcept { return nsps.size(); }
    std::size_t node_count() const noexcept { return entry_nodes.size() + split_nodes.size() + 1; }

    bool is_entry(NodeId v) const { return std::binary_search(entry_nodes.begin(), entry_nodes.end(), v); }
    bool leads_to_da(NspId i) const { return nsps[i].terminal == da; }

    /// Index of `e` in `bw_edges`, if it is block-worthy.
    std::optional<std::size_t> bw_index(EdgeId e) const {
        auto it = std::lower_bound(bw_edges.begin(), bw_edges.end(), e);
        if (it == bw_edges.end() || *it != e) return std::nullopt;
        return static_cast<std::size_t>(it - bw_edges.begin());
    }

    /// NSPs whose block-worthy edge is `bw_edges[bw]`.
    std::vector<NspId> nsps_blocked_by(std::size_t bw) const {
        std::vector<NspId> out;
        for (const Nsp& p : nsps)
            if (p.block_worthy_edge == bw_edges.at(bw)) out.push_back(p.id);
        return out;
    }
};

namespace detail {

inline std::size_t count_weak_components(const AttackGraph& g) {
    std::vector<NodeId> parent(g.node_count());
    for (NodeId v = 0; v < parent.size(); ++v) parent[v] = v;
    auto find = [&](NodeId v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    std::size_t comps = g.node_count();
    for (const Edge& e : g.edges()) {
        NodeId a = find(e.src), b = find(e.dst);
        if (a != b) parent[a] = b, --comps;
    }
    return comps;
}

}  // namespace detail

/// Builds the NSP set and the edge-to-NSP incidence of a pruned graph.
/// Block-worthy data is left empty; see `compute_block_worthy`.
inline CondensedGraph extract_nsps(const AttackGraph& g) {
    const NodeId da = g.require_da();
    Adjacency adj(g);
    if (!adj.out[da].empty()) throw KernelError("DA has outgoing edges; prune the graph first");
    for (NodeId e : g.entry_nodes())
        if (!adj.in[e].empty()) throw KernelError("entry node has incoming edges; prune the graph first");

    CondensedGraph cg;
    cg.da = da;
    cg.graph_node_count = g.node_count();
    cg.entry_nodes = g.entry_nodes();
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (v != da && adj.out[v].size() > 1) cg.split_nodes.push_back(v);
    for (const Edge& e : g.edges()) {
        cg.p_detect.push_back(e.p_detect);
        cg.p_fail.push_back(e.p_fail);
    }
    cg.feedback_edges = g.edge_count() + detail::count_weak_components(g) - g.node_count();

    std::vector<char> is_split(g.node_count(), 0);
    for (NodeId v : cg.split_nodes) is_split[v] = 1;

    std::vector<NodeId> sources;
    std::set_union(cg.entry_nodes.begin(), cg.entry_nodes.end(), cg.split_nodes.begin(), cg.split_nodes.end(),
                   std::back_inserter(sources));

    std::vector<char> on_path(g.node_count(), 0);
    for (NodeId src : sources) {
        for (EdgeId first : adj.out[src]) {
            Nsp p;
            p.id = static_cast<NspId>(cg.nsps.size());
            p.source = src;
            p.edges.push_back(first);
            std::vector<NodeId> visited{src};
            on_path[src] = 1;
            NodeId cur = g.edge(first).dst;
            while (cur != da && !is_split[cur]) {
                if (on_path[cur]) throw KernelError("sole-successor cycle that never reaches the DA or a split node");
                if (adj.out[cur].empty()) throw KernelError("dead-end node " + std::to_string(cur) + " on a non-splitting path");
                if (g.is_entry(cur)) throw KernelError("non-splitting path runs into an entry node");
                on_path[cur] = 1;
                visited.push_back(cur);
                EdgeId next = adj.out[cur].front();
                p.edges.push_back(next);
                cur = g.edge(next).dst;
            }
            for (NodeId v : visited) on_path[v] = 0;
            p.terminal = cur;
            for (EdgeId e : p.edges) cg.edge_to_nsps[e].push_back(p.id);
            cg.nsps.push_back(std::move(p));
        }
    }
    return cg;
}

/// Marks each NSP's furthermost blockable edge and collects the block-worthy
/// set. Throws `KernelError` if the size bound |BW| <= s + t + h fails.
inline CondensedGraph compute_block_worthy(CondensedGraph cg, const AttackGraph& g) {
    cg.bw_edges.clear();
    for (Nsp& p : cg.nsps) {
        p.blockable = false;
        p.block_worthy_edge.reset();
        for (auto it = p.edges.rbegin(); it != p.edges.rend(); ++it) {
            if (g.edge(*it).blockable) {
                p.blockable = true;
                p.block_worthy_edge = *it;
                cg.bw_edges.push_back(*it);
                break;
            }
        }
    }
    std::sort(cg.bw_edges.begin(), cg.bw_edges.end());
    cg.bw_edges.erase(std::unique(cg.bw_edges.begin(), cg.bw_edges.end()), cg.bw_edges.end());

    const std::size_t s = cg.entry_nodes.size(), t = cg.split_nodes.size(), h = cg.feedback_edges;
    if (cg.bw_edges.size() > s + t + h || cg.bw_edges.size() > s + 2 * h)
        throw KernelError("block-worthy set exceeds the s + t + h bound");
    return cg;
}

inline CondensedGraph kernelize(const AttackGraph& g) { return compute_block_worthy(extract_nsps(g), g); }

/// Human-readable NSP and block-worthy tables.
inline void write_kernel_report(std::ostream& os, const CondensedGraph& cg, const AttackGraph& g) {
    auto name = [&](NodeId v) {
        const auto& label = g.node(v).label;
        return label.empty() ? std::to_string(v) : label;
    };
    os << "# kernel: " << cg.entry_nodes.size() << " entry, " << cg.split_nodes.size() << " split, "
       << cg.nsp_count() << " NSP, " << cg.bw_edges.size() << " block-worthy, h=" << cg.feedback_edges << '\n';
    os << "# nsp source terminal blockable block_worthy path\n";
    for (const Nsp& p : cg.nsps) {
        os << "nsp " << p.id << ' ' << name(p.source) << ' ' << name(p.terminal) << ' ' << (p.blockable ? 1 : 0)
           << ' ' << (p.block_worthy_edge ? std::to_string(*p.block_worthy_edge) : "-") << ' ' << name(p.source);
        for (EdgeId e : p.edges) os << ',' << name(g.edge(e).dst);
        os << '\n';
    }
    os << "# bw index edge src dst nsps\n";
    for (std::size_t i = 0; i < cg.bw_edges.size(); ++i) {
        EdgeId e = cg.bw_edges[i];
        os << "bw " << i << ' ' << e << ' ' << name(g.edge(e).src) << ' ' << name(g.edge(e).dst);
        auto blocked = cg.nsps_blocked_by(i);
        for (std::size_t j = 0; j < blocked.size(); ++j) os << (j ? ',' : ' ') << blocked[j];
        os << '\n';
    }
}

}  // namespace adgame
