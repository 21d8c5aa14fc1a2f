#pragma once

// Finite simple graphs, generators for the families used throughout, an
// exact chromatic-number solver, and extraction of unit-distance graphs
// from embedded point sets.

#include "chromasphere/sphere.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chromasphere {

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Simple undirected graph on vertices 0..n-1. Edges are normalized to
/// (min, max) and kept sorted; loops and duplicates are rejected.
class Graph {
 public:
  Graph() : n_(0) {}

  Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n < 0) throw std::invalid_argument("Graph: negative vertex count");
    for (auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw std::invalid_argument("Graph: edge endpoint out of range");
      if (a == b) throw std::invalid_argument("Graph: loop edge");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw std::invalid_argument("Graph: duplicate edge");
    edges_ = std::move(edges);
    neighbors_.assign(n_, {});
    for (auto [a, b] : edges_) {
      neighbors_[a].push_back(b);
      neighbors_[b].push_back(a);
    }
  }

  int n() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }
  int degree(int v) const { return static_cast<int>(neighbors_[v].size()); }

  bool adjacent(int a, int b) const {
    const auto& nb = neighbors_[a];
    return std::find(nb.begin(), nb.end(), b) != nb.end();
  }

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

inline Graph gen_cycle(int n) {
  if (n < 3) throw std::invalid_argument("gen_cycle: need n >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, std::move(edges));
}

/// Odd cycle C_{2k+1}.
inline Graph gen_odd_cycle(int k) {
  if (k < 1) throw std::invalid_argument("gen_odd_cycle: need k >= 1");
  return gen_cycle(2 * k + 1);
}

/// G_k: odd cycle of length m = 2k+1 on vertices 0..m-1 plus one pendant
/// vertex m+i attached to each cycle vertex i. 2m vertices, 2m edges.
inline Graph gen_pendant_cycle(int k) {
  if (k < 1) throw std::invalid_argument("gen_pendant_cycle: need k >= 1");
  int m = 2 * k + 1;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
  for (int i = 0; i < m; ++i) edges.emplace_back(i, m + i);
  return Graph(2 * m, std::move(edges));
}

/// Mycielskian of C_5: 11 vertices, 20 edges, triangle-free, chromatic
/// number 4. Cycle 0..4, shadow vertices 5..9, apex 10.
inline Graph gen_groetzsch() {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 5; ++i) edges.emplace_back(i, (i + 1) % 5);
  for (int i = 0; i < 5; ++i) {
    edges.emplace_back(5 + i, (i + 1) % 5);
    edges.emplace_back(5 + i, (i + 4) % 5);
  }
  for (int i = 0; i < 5; ++i) edges.emplace_back(10, 5 + i);
  return Graph(11, std::move(edges));
}

inline Graph gen_complete(int n) {
  if (n < 1) throw std::invalid_argument("gen_complete: need n >= 1");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

/// True iff every edge is bichromatic. colors must assign one color per
/// vertex.
inline bool verify_coloring(const Graph& g, const std::vector<int>& colors) {
  if (static_cast<int>(colors.size()) != g.n())
    throw LengthMismatch("verify_coloring: expected " + std::to_string(g.n()) +
                         " colors, got " + std::to_string(colors.size()));
  for (auto [a, b] : g.edges())
    if (colors[a] == colors[b]) return false;
  return true;
}

struct ChromaticResult {
  int chi = 0;
  std::vector<int> coloring;
};

namespace detail {

/// Greedy clique by descending degree; gives the branch-and-bound lower
/// bound and the vertices preassigned to distinct colors.
inline std::vector<int> greedy_clique(const Graph& g) {
  std::vector<int> order(g.n());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.degree(a) > g.degree(b); });
  std::vector<int> clique;
  for (int v : order) {
    bool ok = true;
    for (int u : clique)
      if (!g.adjacent(u, v)) {
        ok = false;
        break;
      }
    if (ok) clique.push_back(v);
  }
  return clique;
}

/// DSATUR greedy coloring; returns (colors used, coloring). Serves as the
/// upper bound and the fallback witness.
inline std::pair<int, std::vector<int>> dsatur_greedy(const Graph& g) {
  const int n = g.n();
  std::vector<int> colors(n, -1);
  std::vector<std::uint64_t> saturation(n, 0);
  int used = 0;
  for (int step = 0; step < n; ++step) {
    int best = -1, best_sat = -1, best_deg = -1;
    for (int v = 0; v < n; ++v) {
      if (colors[v] >= 0) continue;
      int sat = __builtin_popcountll(saturation[v]);
      if (sat > best_sat || (sat == best_sat && g.degree(v) > best_deg)) {
        best = v;
        best_sat = sat;
        best_deg = g.degree(v);
      }
    }
    int c = 0;
    while (saturation[best] >> c & 1) ++c;
    colors[best] = c;
    used = std::max(used, c + 1);
    for (int u : g.neighbors(best)) saturation[u] |= 1ULL << c;
  }
  return {used, colors};
}

struct KColorSearch {
  const Graph& g;
  int k;
  std::vector<int> colors;

  bool run(const std::vector<int>& clique) {
    if (static_cast<int>(clique.size()) > k) return false;
    colors.assign(g.n(), -1);
    int max_used = -1;
    for (int v : clique) colors[v] = ++max_used;
    return expand(static_cast<int>(clique.size()), max_used);
  }

  std::uint64_t forbidden(int v) const {
    std::uint64_t mask = 0;
    for (int u : g.neighbors(v))
      if (colors[u] >= 0) mask |= 1ULL << colors[u];
    return mask;
  }

  bool expand(int assigned, int max_used) {
    if (assigned == g.n()) return true;
    // DSATUR order: most saturated first, ties by degree then index.
    int v = -1, v_sat = -1, v_deg = -1;
    for (int u = 0; u < g.n(); ++u) {
      if (colors[u] >= 0) continue;
      int sat = __builtin_popcountll(forbidden(u));
      if (sat > v_sat || (sat == v_sat && g.degree(u) > v_deg)) {
        v = u;
        v_sat = sat;
        v_deg = g.degree(u);
      }
    }
    std::uint64_t banned = forbidden(v);
    // Symmetry breaking: a fresh color may only be the next unused one.
    int limit = std::min(k - 1, max_used + 1);
    for (int c = 0; c <= limit; ++c) {
      if (banned >> c & 1) continue;
      colors[v] = c;
      bool dead = false;
      for (int u = 0; u < g.n(); ++u) {
        if (colors[u] >= 0) continue;
        std::uint64_t f = forbidden(u);
        if (__builtin_popcountll(f & ((k >= 64 ? ~0ULL : (1ULL << k) - 1))) >= k) {
          dead = true;
          break;
        }
      }
      if (!dead && expand(assigned + 1, std::max(max_used, c))) return true;
      colors[v] = -1;
    }
    return false;
  }
};

}  // namespace detail

/// Exact chromatic number with a proper witness coloring: greedy clique
/// lower bound, DSATUR upper bound, then k-colorability search with
/// clique preassignment and first-use color ordering.
inline ChromaticResult chromatic_number(const Graph& g) {
  if (g.n() < 1) throw std::invalid_argument("chromatic_number: empty graph");
  auto clique = detail::greedy_clique(g);
  auto [ub, witness] = detail::dsatur_greedy(g);
  int lb = std::max<int>(1, static_cast<int>(clique.size()));
  if (ub >= 64)
    throw std::invalid_argument("chromatic_number: instance needs >= 64 colors");
  for (int k = lb; k < ub; ++k) {
    detail::KColorSearch search{g, k, {}};
    if (search.run(clique)) {
      ChromaticResult res{k, search.colors};
      if (!verify_coloring(g, res.coloring))
        throw std::logic_error("chromatic_number: witness failed verification");
      return res;
    }
  }
  ChromaticResult res{ub, witness};
  if (!verify_coloring(g, res.coloring))
    throw std::logic_error("chromatic_number: witness failed verification");
  return res;
}

/// Geometric realization of a graph: points in bijection with vertices,
/// every edge a unit chord within unit_tol.
struct EmbeddedGraph {
  Graph graph;
  std::vector<SpherePoint> points;
  double unit_tol = 1e-9;

  EmbeddedGraph(Graph g, std::vector<SpherePoint> pts, double tol)
      : graph(std::move(g)), points(std::move(pts)), unit_tol(tol) {
    if (points.size() != static_cast<size_t>(graph.n()))
      throw LengthMismatch("EmbeddedGraph: point count != vertex count");
    for (auto [a, b] : graph.edges()) {
      double c = chord(points[a], points[b]);
      if (std::abs(c - 1.0) > unit_tol)
        throw DegenerateInput("EmbeddedGraph: edge (" + std::to_string(a) + "," +
                              std::to_string(b) + ") has chord " + std::to_string(c));
    }
  }
};

/// Graph with an edge wherever the chord distance is 1 within tol.
inline EmbeddedGraph unit_distance_graph(const std::vector<SpherePoint>& points,
                                         double tol = 1e-9) {
  if (points.empty())
    throw DegenerateInput("unit_distance_graph: empty point list");
  if (tol < 0.0) throw DegenerateInput("unit_distance_graph: negative tolerance");
  const double r = points[0].r();
  for (const auto& p : points)
    detail::require_same_sphere(p.r(), r, "unit_distance_graph");
  const int n = static_cast<int>(points.size());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(chord(points[i], points[j]) - 1.0) <= tol)
        edges.emplace_back(i, j);
  return EmbeddedGraph(Graph(n, std::move(edges)), points, tol);
}

}  // namespace chromasphere
