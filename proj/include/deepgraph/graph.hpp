#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "deepgraph/matrix.hpp"

namespace deepgraph {

// Immutable sparse undirected graph. Neighbor lists are strictly increasing
// and symmetric; self-loops are never stored (they are introduced only by
// normalize()).
struct Graph {
    int num_nodes = 0;
    std::vector<int> row_ptr;  // size num_nodes + 1
    std::vector<int> col_idx;
    DenseMatrix features;      // n x d (may be 0 x 0 when absent)
    std::vector<int> labels;   // class id per node, empty when unlabeled
    int num_classes = 0;
    std::vector<std::uint8_t> train_mask, val_mask, test_mask;

    int degree(int i) const { return row_ptr[std::size_t(i) + 1] - row_ptr[std::size_t(i)]; }

    std::span<const int> neighbors(int i) const {
        return {col_idx.data() + row_ptr[std::size_t(i)], std::size_t(degree(i))};
    }

    bool adjacent(int i, int j) const;
    std::size_t num_edges() const { return col_idx.size() / 2; }

    // Builds the CSR structure from an arbitrary edge list: symmetrizes,
    // sorts, deduplicates, and drops self-loops. Counts of dropped items are
    // reported through the optional pointers.
    static Graph from_edges(int n, std::vector<std::pair<int, int>> edges,
                            int* dropped_self_loops = nullptr, int* dropped_duplicates = nullptr);

    void check_invariants() const;  // throws std::logic_error on violation
};

// CSR form of the re-normalized self-looped adjacency matrix
// D~^{-1/2} (A + I) D~^{-1/2}.
struct NormalizedAdjacency {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;
};

NormalizedAdjacency normalize(const Graph& graph);

// Hamming distance between rows i and j of the self-looped adjacency matrix,
// i.e. the size of the symmetric difference of the two self-looped neighbor
// sets.
int hamming_distance(const Graph& graph, int i, int j);

// BFS labeling; component ids are dense in [0, count) in discovery order.
std::pair<std::vector<int>, int> connected_components(const Graph& graph);

// Exact diameter of the largest connected component (all-sources BFS).
// approx = true runs a double BFS sweep instead and returns a lower bound.
int diameter_largest_component(const Graph& graph, bool approx = false);

}  // namespace deepgraph
