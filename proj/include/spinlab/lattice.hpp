// lattice.hpp - finite spin graphs, graph metric, diameters and set distances.

#pragma once

#include "spinlab/core.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

/// Graph distance; std::nullopt encodes "infinite" (vertices in different components).
using Distance = std::optional<int>;

struct Edge {
    Vertex x = 0;
    Vertex y = 0;
    double weight = 1.0;  // J_xy for spin models, r_xy for exclusion processes
};

/// Vertices 0..V-1, weighted undirected edges and a spin magnitude per vertex.
/// Immutable after construction; all-pairs BFS distances are cached.
class SpinGraph {
public:
    SpinGraph(int num_vertices, std::vector<Edge> edges, std::vector<HalfInteger> spins)
        : n_(num_vertices), edges_(std::move(edges)), spins_(std::move(spins)) {
        if (n_ <= 0) throw DomainError("SpinGraph: need at least one vertex");
        if (static_cast<int>(spins_.size()) != n_) throw DomainError("SpinGraph: one spin per vertex required");
        for (auto s : spins_) {
            if (s.twice() < 1) throw DomainError("SpinGraph: spin magnitude must be >= 1/2, got " + s.str());
        }
        std::set<std::pair<Vertex, Vertex>> seen;
        adjacency_.assign(n_, {});
        for (const auto& e : edges_) {
            if (e.x < 0 || e.x >= n_ || e.y < 0 || e.y >= n_) {
                throw DomainError("SpinGraph: edge (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                                  ") references unknown vertex");
            }
            if (e.x == e.y) throw DomainError("SpinGraph: self-loop at vertex " + std::to_string(e.x));
            if (!std::isfinite(e.weight)) throw DomainError("SpinGraph: non-finite edge weight");
            auto key = std::minmax(e.x, e.y);
            if (!seen.insert(key).second) {
                throw DomainError("SpinGraph: duplicate edge (" + std::to_string(key.first) + "," +
                                  std::to_string(key.second) + ")");
            }
            adjacency_[e.x].push_back(e.y);
            adjacency_[e.y].push_back(e.x);
        }
        compute_distances();
    }

    SpinGraph(int num_vertices, std::vector<Edge> edges, HalfInteger spin = half(1))
        : SpinGraph(num_vertices, std::move(edges), std::vector<HalfInteger>(std::max(num_vertices, 0), spin)) {}

    int num_vertices() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<HalfInteger>& spins() const noexcept { return spins_; }
    HalfInteger spin(Vertex x) const { return spins_.at(check(x)); }
    const std::vector<Vertex>& neighbors(Vertex x) const { return adjacency_.at(check(x)); }

    Distance distance(Vertex x, Vertex y) const {
        const int d = dist_[static_cast<std::size_t>(check(x)) * n_ + check(y)];
        if (d < 0) return std::nullopt;
        return d;
    }

    bool is_connected() const noexcept {
        return std::none_of(dist_.begin(), dist_.begin() + n_, [](int d) { return d < 0; });
    }

    /// Largest site dimension 2s+1 (the N of the interaction norm).
    int max_site_dim() const noexcept {
        int m = 0;
        for (auto s : spins_) m = std::max(m, s.twice() + 1);
        return m;
    }

    /// Two-colouring of the graph when one exists: (A, B) with A containing vertex 0's class.
    std::optional<std::pair<std::vector<Vertex>, std::vector<Vertex>>> bipartition() const {
        std::vector<int> colour(n_, -1);
        for (Vertex root = 0; root < n_; ++root) {
            if (colour[root] >= 0) continue;
            colour[root] = 0;
            std::queue<Vertex> q;
            q.push(root);
            while (!q.empty()) {
                Vertex u = q.front();
                q.pop();
                for (Vertex v : adjacency_[u]) {
                    if (colour[v] < 0) {
                        colour[v] = 1 - colour[u];
                        q.push(v);
                    } else if (colour[v] == colour[u]) {
                        return std::nullopt;
                    }
                }
            }
        }
        std::pair<std::vector<Vertex>, std::vector<Vertex>> parts;
        for (Vertex v = 0; v < n_; ++v) (colour[v] == 0 ? parts.first : parts.second).push_back(v);
        return parts;
    }

    SpinGraph with_uniform_spin(HalfInteger s) const { return SpinGraph(n_, edges_, s); }

    SpinGraph with_weights(std::span<const double> weights) const {
        if (weights.size() != edges_.size()) throw DomainError("with_weights: one weight per edge required");
        auto e = edges_;
        for (std::size_t i = 0; i < e.size(); ++i) e[i].weight = weights[i];
        return SpinGraph(n_, std::move(e), spins_);
    }

private:
    Vertex check(Vertex x) const {
        if (x < 0 || x >= n_) throw DomainError("unknown vertex " + std::to_string(x));
        return x;
    }

    void compute_distances() {
        dist_.assign(static_cast<std::size_t>(n_) * n_, -1);
        for (Vertex src = 0; src < n_; ++src) {
            int* row = dist_.data() + static_cast<std::size_t>(src) * n_;
            row[src] = 0;
            std::queue<Vertex> q;
            q.push(src);
            while (!q.empty()) {
                Vertex u = q.front();
                q.pop();
                for (Vertex v : adjacency_[u]) {
                    if (row[v] < 0) {
                        row[v] = row[u] + 1;
                        q.push(v);
                    }
                }
            }
        }
    }

    int n_;
    std::vector<Edge> edges_;
    std::vector<HalfInteger> spins_;
    std::vector<std::vector<Vertex>> adjacency_;
    std::vector<int> dist_;
};

// ------------------------------------------------------------ metric helpers

inline Distance graph_distance(const SpinGraph& g, Vertex x, Vertex y) { return g.distance(x, y); }

/// D(X) = max pairwise distance inside X; nullopt if X straddles components.
inline Distance diameter(const SpinGraph& g, std::span<const Vertex> X) {
    if (X.empty()) throw DomainError("diameter: empty vertex set");
    int best = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = i; j < X.size(); ++j) {
            auto d = g.distance(X[i], X[j]);
            if (!d) return std::nullopt;
            best = std::max(best, *d);
        }
    }
    return best;
}

/// d(x, Y) = min over y in Y of d(x, y).
inline Distance set_distance(const SpinGraph& g, Vertex x, std::span<const Vertex> Y) {
    if (Y.empty()) throw DomainError("set_distance: empty vertex set");
    Distance best;
    for (Vertex y : Y) {
        auto d = g.distance(x, y);
        if (d && (!best || *d < *best)) best = d;
    }
    return best;
}

// ------------------------------------------------------------ builders

inline SpinGraph path_graph(int L, HalfInteger spin = half(1), double weight = 1.0) {
    std::vector<Edge> e;
    for (int x = 0; x + 1 < L; ++x) e.push_back({x, x + 1, weight});
    return SpinGraph(L, std::move(e), spin);
}

/// Cycle 0-1-...-(L-1)-0; L >= 3 so that the closing edge is not a duplicate.
inline SpinGraph ring_graph(int L, HalfInteger spin = half(1), double weight = 1.0) {
    if (L < 3) throw DomainError("ring_graph: need L >= 3");
    std::vector<Edge> e;
    for (int x = 0; x < L; ++x) e.push_back({std::min(x, (x + 1) % L), std::max(x, (x + 1) % L), weight});
    return SpinGraph(L, std::move(e), spin);
}

inline SpinGraph complete_graph(int n, HalfInteger spin = half(1), double weight = 1.0) {
    std::vector<Edge> e;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) e.push_back({x, y, weight});
    return SpinGraph(n, std::move(e), spin);
}

/// Vertex 0 is the hub.
inline SpinGraph star_graph(int n, HalfInteger spin = half(1), double weight = 1.0) {
    std::vector<Edge> e;
    for (int y = 1; y < n; ++y) e.push_back({0, y, weight});
    return SpinGraph(n, std::move(e), spin);
}

// ------------------------------------------------------------ graph file

/// Format:
///   vertices N
///   x y weight        (one line per edge)
///   spin x s          (optional; s like 1/2, 1, 3/2 or 0.5)
/// Blank lines and lines starting with '#' are ignored. Spins default to 1/2.
inline SpinGraph parse_graph(std::istream& in) {
    auto parse_spin = [](const std::string& tok, int line) {
        try {
            auto slash = tok.find('/');
            if (slash != std::string::npos) {
                if (tok.substr(slash + 1) != "2") throw DomainError("denominator must be 2");
                return HalfInteger::from_twice(std::stoi(tok.substr(0, slash)));
            }
            return HalfInteger::from_double(std::stod(tok));
        } catch (const std::exception& ex) {
            throw DomainError("graph file line " + std::to_string(line) + ": bad spin '" + tok + "': " + ex.what());
        }
    };

    std::string raw;
    int line = 0;
    int n = -1;
    std::vector<Edge> edges;
    std::vector<std::pair<Vertex, HalfInteger>> spin_lines;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string head;
        if (!(ls >> head)) continue;
        auto fail = [&](const std::string& msg) {
            throw DomainError("graph file line " + std::to_string(line) + ": " + msg);
        };
        if (n < 0) {
            if (head != "vertices" || !(ls >> n) || n <= 0) fail("expected header 'vertices N'");
        } else if (head == "spin") {
            Vertex x;
            std::string s;
            if (!(ls >> x >> s)) fail("expected 'spin x s'");
            spin_lines.emplace_back(x, parse_spin(s, line));
        } else {
            Edge e;
            try {
                e.x = std::stoi(head);
            } catch (...) {
                fail("unrecognised line '" + head + "'");
            }
            if (!(ls >> e.y >> e.weight)) fail("expected 'x y weight'");
            edges.push_back(e);
        }
        std::string extra;
        if (ls >> extra) fail("trailing token '" + extra + "'");
    }
    if (n < 0) throw DomainError("graph file: missing 'vertices N' header");
    std::vector<HalfInteger> spins(n, half(1));
    for (auto [x, s] : spin_lines) {
        if (x < 0 || x >= n) throw DomainError("graph file: spin for unknown vertex " + std::to_string(x));
        spins[x] = s;
    }
    return SpinGraph(n, std::move(edges), std::move(spins));
}

inline SpinGraph read_graph_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open graph file '" + path + "'");
    return parse_graph(f);
}

}  // namespace spinlab
