#pragma once

#include <adgame/graph.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace adgame {

// Text format, one record per line:
//
//   adgraph <version> <node count> <edge count>
//   node <id> <kind> <is_entry> <is_da> <label|->
//   edge <src> <dst> <kind> <p_d> <p_f> <blockable>
//
// Nodes precede edges and appear in id order. Probabilities are written with
// 17 significant digits so a save/load round trip is bit exact.

inline constexpr int kGraphFormatVersion = 1;

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_graph(std::ostream& os, const AttackGraph& g) {
    os << "adgraph " << kGraphFormatVersion << ' ' << g.node_count() << ' ' << g.edge_count() << '\n';
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const Node& node = g.node(v);
        os << "node " << v << ' ' << to_string(node.kind) << ' ' << (g.is_entry(v) ? 1 : 0) << ' '
           << (g.da() == v ? 1 : 0) << ' ' << (node.label.empty() ? "-" : node.label) << '\n';
    }
    for (const Edge& e : g.edges()) {
        os << "edge " << e.src << ' ' << e.dst << ' ' << to_string(e.kind) << ' ' << format_double(e.p_detect)
           << ' ' << format_double(e.p_fail) << ' ' << (e.blockable ? 1 : 0) << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& field, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ", field '" + field + "': " + msg);
}

template <typename T>
T parse_number(const std::string& tok, std::size_t line, const std::string& field) {
    T value{};
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) parse_fail(line, field, "bad number '" + tok + "'");
    return value;
}

inline bool parse_flag(const std::string& tok, std::size_t line, const std::string& field) {
    if (tok == "0") return false;
    if (tok == "1") return true;
    parse_fail(line, field, "expected 0 or 1, got '" + tok + "'");
}

}  // namespace detail

inline AttackGraph read_graph(std::istream& is) {
    using detail::parse_fail;
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> std::vector<std::string> {
        while (std::getline(is, line)) {
            ++lineno;
            auto toks = detail::split_ws(line);
            if (!toks.empty()) return toks;
        }
        return {};
    };

    auto header = next();
    if (header.size() != 4 || header[0] != "adgraph") parse_fail(lineno, "header", "expected 'adgraph <version> <nodes> <edges>'");
    if (detail::parse_number<int>(header[1], lineno, "version") != kGraphFormatVersion)
        parse_fail(lineno, "version", "unsupported format version " + header[1]);
    const auto n = detail::parse_number<std::size_t>(header[2], lineno, "node count");
    const auto m = detail::parse_number<std::size_t>(header[3], lineno, "edge count");

    AttackGraph g;
    std::vector<NodeId> entries;
    std::optional<NodeId> da;
    for (std::size_t i = 0; i < n; ++i) {
        auto t = next();
        if (t.empty()) parse_fail(lineno + 1, "node", "unexpected end of file");
        if (t[0] != "node" || t.size() != 6) parse_fail(lineno, "node", "expected 'node <id> <kind> <is_entry> <is_da> <label>'");
        if (detail::parse_number<std::size_t>(t[1], lineno, "id") != i) parse_fail(lineno, "id", "node ids must be dense and ordered");
        auto kind = parse_node_kind(t[2]);
        if (!kind) parse_fail(lineno, "kind", "unknown node kind '" + t[2] + "'");
        bool is_entry = detail::parse_flag(t[3], lineno, "is_entry");
        bool is_da = detail::parse_flag(t[4], lineno, "is_da");
        NodeId id = g.add_node(*kind, t[5] == "-" ? std::string{} : t[5]);
        if (is_entry) entries.push_back(id);
        if (is_da) {
            if (da) parse_fail(lineno, "is_da", "more than one node flagged as DA");
            da = id;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        auto t = next();
        if (t.empty()) parse_fail(lineno + 1, "edge", "unexpected end of file");
        if (t[0] != "edge" || t.size() != 7) parse_fail(lineno, "edge", "expected 'edge <src> <dst> <kind> <p_d> <p_f> <blockable>'");
        auto src = detail::parse_number<NodeId>(t[1], lineno, "src");
        auto dst = detail::parse_number<NodeId>(t[2], lineno, "dst");
        if (src >= n) parse_fail(lineno, "src", "node id out of range");
        if (dst >= n) parse_fail(lineno, "dst", "node id out of range");
        auto kind = parse_edge_kind(t[3]);
        if (!kind) parse_fail(lineno, "kind", "unknown edge kind '" + t[3] + "'");
        double pd = detail::parse_number<double>(t[4], lineno, "p_d");
        double pf = detail::parse_number<double>(t[5], lineno, "p_f");
        bool blockable = detail::parse_flag(t[6], lineno, "blockable");
        g.add_edge(src, dst, *kind, pd, pf, blockable);
    }
    if (!next().empty()) parse_fail(lineno, "trailer", "unexpected content after the last edge record");
    g.set_entry_nodes(std::move(entries));
    g.set_da(da);
    validate(g);
    return g;
}

inline void save_graph(const AttackGraph& g, const std::string& path) {
    validate(g);
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_graph(os, g);
    if (!os) throw IoError("failed writing '" + path + "'");
}

inline AttackGraph load_graph(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_graph(is);
}

}  // namespace adgame
