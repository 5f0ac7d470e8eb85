#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "netfx/core/error.hpp"
#include "netfx/core/random.hpp"

namespace netfx {

/// Undirected simple graph in CSR form. Neighbor lists are sorted.
class Graph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    Graph() = default;

    /// Builds from an arbitrary edge list: both orientations are collapsed,
    /// duplicates merged and self-loops dropped.
    static Graph from_edges(std::size_t n, std::vector<Edge> edges) {
        Graph g;
        g.n_ = n;
        for (auto& e : edges) {
            if (e.first >= n || e.second >= n) throw std::invalid_argument("graph: vertex id out of range");
            if (e.first > e.second) std::swap(e.first, e.second);
        }
        std::erase_if(edges, [](const Edge& e) { return e.first == e.second; });
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        g.offsets_.assign(n + 1, 0);
        for (const auto& [a, b] : edges) {
            ++g.offsets_[a + 1];
            ++g.offsets_[b + 1];
        }
        for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
        g.adjacency_.resize(g.offsets_[n]);
        std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& [a, b] : edges) {
            g.adjacency_[fill[a]++] = b;
            g.adjacency_[fill[b]++] = a;
        }
        for (std::size_t v = 0; v < n; ++v)
            std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
                      g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]));
        g.edges_ = std::move(edges);
        return g;
    }

    [[nodiscard]] std::size_t n_vertices() const noexcept { return n_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
    [[nodiscard]] std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }
    [[nodiscard]] std::span<const std::uint32_t> neighbors(std::size_t v) const {
        return {adjacency_.data() + offsets_[v], degree(v)};
    }
    /// Canonical edges (u < v), sorted.
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] double mean_degree() const {
        return n_ == 0 ? 0.0 : 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_);
    }

    /// Vertex coordinates in [0,1]^2 (random geometric graphs only).
    std::optional<std::vector<std::pair<double, double>>> positions;

    /// Checks symmetry, absence of self-loops and degree/edge consistency.
    [[nodiscard]] bool invariants_hold() const {
        std::size_t total = 0;
        for (std::size_t v = 0; v < n_; ++v) {
            for (auto u : neighbors(v)) {
                if (u == v) return false;
                const auto nb = neighbors(u);
                if (!std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(v))) return false;
            }
            total += degree(v);
        }
        return total == 2 * edges_.size() && (!positions || positions->size() == n_);
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> adjacency_;
    std::vector<Edge> edges_;
};

/// Random geometric graph on given points: edge iff distance <= radius.
/// Uses a uniform cell grid with side >= radius.
[[nodiscard]] inline Graph gen_rgg_from_positions(std::vector<std::pair<double, double>> pts, double radius) {
    const std::size_t n = pts.size();
    if (!(radius >= 0.0)) throw std::invalid_argument("gen_rgg: radius must be >= 0");
    const double cap = std::ceil(std::sqrt(static_cast<double>(n))) + 1.0;
    const double per_side = radius > 0.0 ? std::min(std::floor(1.0 / radius), cap) : cap;
    const std::size_t cells = std::max<std::size_t>(1, static_cast<std::size_t>(per_side));
    auto cell_of = [&](double x) {
        return std::min(cells - 1, static_cast<std::size_t>(std::max(0.0, x) * static_cast<double>(cells)));
    };
    std::vector<std::vector<std::uint32_t>> grid(cells * cells);
    for (std::size_t i = 0; i < n; ++i)
        grid[cell_of(pts[i].first) * cells + cell_of(pts[i].second)].push_back(static_cast<std::uint32_t>(i));

    const double r2 = radius * radius;
    std::vector<Graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cx = cell_of(pts[i].first), cy = cell_of(pts[i].second);
        for (std::size_t dx = cx == 0 ? 0 : cx - 1; dx <= std::min(cells - 1, cx + 1); ++dx)
            for (std::size_t dy = cy == 0 ? 0 : cy - 1; dy <= std::min(cells - 1, cy + 1); ++dy)
                for (auto j : grid[dx * cells + dy]) {
                    if (j <= i) continue;
                    const double ex = pts[i].first - pts[j].first, ey = pts[i].second - pts[j].second;
                    if (ex * ex + ey * ey <= r2) edges.emplace_back(static_cast<std::uint32_t>(i), j);
                }
    }
    Graph g = Graph::from_edges(n, std::move(edges));
    g.positions = std::move(pts);
    return g;
}

/// Connection radius sqrt(kappa / (pi N)), giving expected degree ~ kappa.
[[nodiscard]] inline double rgg_radius(std::size_t n, double kappa) {
    return std::sqrt(kappa / (std::numbers::pi * static_cast<double>(n)));
}

/// Random geometric graph on N i.i.d. uniform points of the unit square.
[[nodiscard]] inline Graph gen_rgg(std::size_t n, double kappa, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_rgg: need at least two vertices");
    if (!(kappa > 0.0)) throw std::invalid_argument("gen_rgg: kappa must be positive");
    std::vector<std::pair<double, double>> pts(n);
    for (auto& [x, y] : pts) {
        x = rng.uniform();
        y = rng.uniform();
    }
    return gen_rgg_from_positions(std::move(pts), rgg_radius(n, kappa));
}

/// Erdos-Renyi G(N, p) by geometric skipping over the lower-triangular pairs.
[[nodiscard]] inline Graph gen_er(std::size_t n, double p, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_er: need at least two vertices");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gen_er: p must lie in [0,1]");
    std::vector<Graph::Edge> edges;
    if (p == 1.0) {
        for (std::uint32_t v = 1; v < n; ++v)
            for (std::uint32_t w = 0; w < v; ++w) edges.emplace_back(w, v);
    } else if (p > 0.0) {
        const double log_q = std::log1p(-p);
        std::int64_t v = 1, w = -1;
        const auto nn = static_cast<std::int64_t>(n);
        while (v < nn) {
            const double r = rng.uniform();
            const double skip = std::floor(std::log1p(-r) / log_q);
            if (skip >= static_cast<double>(nn) * static_cast<double>(nn)) break;
            w += 1 + static_cast<std::int64_t>(skip);
            while (w >= v && v < nn) {
                w -= v;
                ++v;
            }
            if (v < nn) edges.emplace_back(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(v));
        }
    }
    return Graph::from_edges(n, std::move(edges));
}

struct EdgeListStats {
    std::size_t lines = 0;
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
    bool one_based = false;
};

/// Whitespace-separated integer pairs, one per line. Blank lines and lines
/// starting with '#' or '%' are skipped. Ids are 1-based when the smallest id
/// is positive, else 0-based.
[[nodiscard]] inline Graph load_edge_list(std::istream& is, EdgeListStats* stats = nullptr) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
    std::string line;
    std::size_t lineno = 0;
    auto parse = [&](std::string_view tok) {
        std::uint64_t v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw io_error("edge list: line " + std::to_string(lineno) + ": not a vertex id: '" + std::string(tok) + "'");
        return v;
    };
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a)) continue;
        if (a[0] == '#' || a[0] == '%') continue;
        if (!(ls >> b) || (ls >> extra))
            throw io_error("edge list: line " + std::to_string(lineno) + " must hold exactly two ids");
        raw.emplace_back(parse(a), parse(b));
    }
    if (raw.empty()) throw io_error("edge list: no edges");

    std::uint64_t lo = raw[0].first, hi = 0;
    for (const auto& [a, b] : raw) {
        lo = std::min({lo, a, b});
        hi = std::max({hi, a, b});
    }
    const std::uint64_t base = lo == 0 ? 0 : 1;
    const std::uint64_t n = hi - base + 1;
    if (n > 0xffffffffULL) throw io_error("edge list: too many vertices");

    std::vector<Graph::Edge> edges;
    edges.reserve(raw.size());
    std::size_t loops = 0;
    for (const auto& [a, b] : raw) {
        if (a == b) {
            ++loops;
            continue;
        }
        edges.emplace_back(static_cast<std::uint32_t>(a - base), static_cast<std::uint32_t>(b - base));
    }
    const std::size_t kept = edges.size();
    Graph g = Graph::from_edges(static_cast<std::size_t>(n), std::move(edges));
    if (stats) *stats = {raw.size(), loops, kept - g.edge_count(), base == 1};
    return g;
}

[[nodiscard]] inline Graph load_edge_list(const std::string& path, EdgeListStats* stats = nullptr) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open edge list: " + path);
    return load_edge_list(is, stats);
}

/// 0-based "u v" lines, one per undirected edge.
inline void write_edge_list(std::ostream& os, const Graph& g) {
    for (const auto& [a, b] : g.edges()) os << a << ' ' << b << '\n';
}

inline void write_edge_list(const std::string& path, const Graph& g) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open for writing: " + path);
    write_edge_list(os, g);
}

/// (degree, vertex count) for every degree that occurs, ascending.
[[nodiscard]] inline std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const Graph& g) {
    std::vector<std::size_t> counts;
    for (std::size_t v = 0; v < g.n_vertices(); ++v) {
        const std::size_t d = g.degree(v);
        if (d >= counts.size()) counts.resize(d + 1, 0);
        ++counts[d];
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t d = 0; d < counts.size(); ++d)
        if (counts[d] > 0) out.emplace_back(d, counts[d]);
    return out;
}

}  // namespace netfx
