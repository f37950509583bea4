#pragma once

#include <cstdint>

#include "hsm/hardcore.hpp"
#include "hsm/rng.hpp"

namespace hsm {

Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph complete_graph(std::size_t n);
/// Vertex 0 is the center.
Graph star_graph(std::size_t leaves);
Graph edgeless_graph(std::size_t n);
/// G(n, p).
Graph random_graph(std::size_t n, double p, Rng& rng);
/// Connected G(n, p): a random tree plus independent extra edges.
Graph random_connected_graph(std::size_t n, double p, Rng& rng);
/// Random recursive tree: vertex v attaches to a uniform earlier vertex.
Graph random_tree(std::size_t n, Rng& rng);

/// Weights drawn uniformly from [lo, hi].
std::vector<double> random_weights(std::size_t n, double lo, double hi, Rng& rng);

/// Greedy cover in a random vertex order, so cliques differ run to run. Disjoint.
CliqueCover random_disjoint_cover(const Graph& graph, Rng& rng);
/// Disjoint random cover plus, per vertex, a chance to join another clique it fits into.
CliqueCover random_clique_cover(const Graph& graph, Rng& rng, double overlap = 0.3);

/// Every connected labelled graph on n <= 6 vertices (edge subsets of K_n).
std::vector<Graph> all_connected_graphs(std::size_t n);

}  // namespace hsm
