#include "deepgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace deepgraph {

bool Graph::adjacent(int i, int j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges, int* dropped_self_loops,
                        int* dropped_duplicates) {
    int self_loops = 0;
    std::vector<std::pair<int, int>> clean;
    clean.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n) {
            throw std::out_of_range("from_edges: node id out of range");
        }
        if (a == b) {
            ++self_loops;
            continue;
        }
        clean.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(clean.begin(), clean.end());
    const auto last = std::unique(clean.begin(), clean.end());
    const int duplicates = int(clean.end() - last);
    clean.erase(last, clean.end());
    if (dropped_self_loops) *dropped_self_loops = self_loops;
    if (dropped_duplicates) *dropped_duplicates = duplicates;

    Graph g;
    g.num_nodes = n;
    g.row_ptr.assign(std::size_t(n) + 1, 0);
    for (auto [a, b] : clean) {
        ++g.row_ptr[std::size_t(a) + 1];
        ++g.row_ptr[std::size_t(b) + 1];
    }
    for (int i = 0; i < n; ++i) g.row_ptr[std::size_t(i) + 1] += g.row_ptr[std::size_t(i)];
    g.col_idx.resize(std::size_t(2) * clean.size());
    std::vector<int> cursor(g.row_ptr.begin(), g.row_ptr.end() - 1);
    for (auto [a, b] : clean) {
        g.col_idx[std::size_t(cursor[std::size_t(a)]++)] = b;
        g.col_idx[std::size_t(cursor[std::size_t(b)]++)] = a;
    }
    // per-row lists are sorted because the (a, b) pairs were processed in
    // lexicographic order for a, but b insertions interleave; sort each row
    for (int i = 0; i < n; ++i) {
        std::sort(g.col_idx.begin() + g.row_ptr[std::size_t(i)],
                  g.col_idx.begin() + g.row_ptr[std::size_t(i) + 1]);
    }
    return g;
}

void Graph::check_invariants() const {
    if (int(row_ptr.size()) != num_nodes + 1) throw std::logic_error("graph: bad row_ptr size");
    for (int i = 0; i < num_nodes; ++i) {
        const auto nb = neighbors(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (nb[k] == i) throw std::logic_error("graph: stored self-loop");
            if (k > 0 && nb[k] <= nb[k - 1]) throw std::logic_error("graph: row not strictly increasing");
            if (!adjacent(nb[k], i)) throw std::logic_error("graph: asymmetric adjacency");
        }
    }
    const bool has_masks = !train_mask.empty() || !val_mask.empty() || !test_mask.empty();
    if (has_masks) {
        for (int i = 0; i < num_nodes; ++i) {
            const int t = (i < int(train_mask.size()) && train_mask[std::size_t(i)]) ? 1 : 0;
            const int v = (i < int(val_mask.size()) && val_mask[std::size_t(i)]) ? 1 : 0;
            const int s = (i < int(test_mask.size()) && test_mask[std::size_t(i)]) ? 1 : 0;
            if (t + v + s > 1) throw std::logic_error("graph: masks overlap");
        }
    }
    if (!labels.empty()) {
        for (int y : labels) {
            if (y < 0 || y >= num_classes) throw std::logic_error("graph: label out of range");
        }
    }
}

NormalizedAdjacency normalize(const Graph& graph) {
    const int n = graph.num_nodes;
    NormalizedAdjacency adj;
    adj.n = n;
    adj.row_ptr.assign(std::size_t(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        adj.row_ptr[std::size_t(i) + 1] = adj.row_ptr[std::size_t(i)] + graph.degree(i) + 1;
    }
    adj.col_idx.resize(std::size_t(adj.row_ptr[std::size_t(n)]));
    adj.values.resize(adj.col_idx.size());

    std::vector<double> inv_sqrt(std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i) inv_sqrt[std::size_t(i)] = 1.0 / std::sqrt(double(graph.degree(i) + 1));

    for (int i = 0; i < n; ++i) {
        int pos = adj.row_ptr[std::size_t(i)];
        bool self_done = false;
        for (int j : graph.neighbors(i)) {
            if (!self_done && i < j) {
                adj.col_idx[std::size_t(pos)] = i;
                adj.values[std::size_t(pos)] = inv_sqrt[std::size_t(i)] * inv_sqrt[std::size_t(i)];
                ++pos;
                self_done = true;
            }
            adj.col_idx[std::size_t(pos)] = j;
            adj.values[std::size_t(pos)] = inv_sqrt[std::size_t(i)] * inv_sqrt[std::size_t(j)];
            ++pos;
        }
        if (!self_done) {
            adj.col_idx[std::size_t(pos)] = i;
            adj.values[std::size_t(pos)] = inv_sqrt[std::size_t(i)] * inv_sqrt[std::size_t(i)];
            ++pos;
        }
    }
    return adj;
}

namespace {

// Walks a sorted neighbor list with the node's own id spliced in, giving the
// self-looped adjacency row without materializing it.
struct SelfLoopedRow {
    std::span<const int> nb;
    int self;
    std::size_t pos = 0;
    bool self_emitted = false;

    bool done() const { return self_emitted && pos == nb.size(); }
    int peek() const {
        if (!self_emitted && (pos == nb.size() || self < nb[pos])) return self;
        return nb[pos];
    }
    void advance() {
        if (!self_emitted && (pos == nb.size() || self < nb[pos])) {
            self_emitted = true;
        } else {
            ++pos;
        }
    }
};

}  // namespace

int hamming_distance(const Graph& graph, int i, int j) {
    if (i < 0 || i >= graph.num_nodes || j < 0 || j >= graph.num_nodes) {
        throw std::out_of_range("hamming_distance: node id out of range");
    }
    if (i == j) return 0;

    // count positions present in exactly one of the two self-looped rows
    SelfLoopedRow a{graph.neighbors(i), i};
    SelfLoopedRow b{graph.neighbors(j), j};
    int diff = 0;
    while (!a.done() && !b.done()) {
        const int av = a.peek();
        const int bv = b.peek();
        if (av == bv) {
            a.advance();
            b.advance();
        } else if (av < bv) {
            ++diff;
            a.advance();
        } else {
            ++diff;
            b.advance();
        }
    }
    while (!a.done()) {
        ++diff;
        a.advance();
    }
    while (!b.done()) {
        ++diff;
        b.advance();
    }
    return diff;
}

std::pair<std::vector<int>, int> connected_components(const Graph& graph) {
    const int n = graph.num_nodes;
    std::vector<int> comp(std::size_t(n), -1);
    int count = 0;
    std::vector<int> queue;
    for (int s = 0; s < n; ++s) {
        if (comp[std::size_t(s)] != -1) continue;
        comp[std::size_t(s)] = count;
        queue.assign(1, s);
        std::size_t head = 0;
        while (head < queue.size()) {
            const int v = queue[head++];
            for (int u : graph.neighbors(v)) {
                if (comp[std::size_t(u)] == -1) {
                    comp[std::size_t(u)] = count;
                    queue.push_back(u);
                }
            }
        }
        ++count;
    }
    return {std::move(comp), count};
}

namespace {

// BFS eccentricity of source restricted to its component; also reports the
// farthest node found.
int bfs_eccentricity(const Graph& graph, int source, int* farthest = nullptr) {
    std::vector<int> dist(std::size_t(graph.num_nodes), -1);
    std::vector<int> queue;
    queue.reserve(64);
    dist[std::size_t(source)] = 0;
    queue.push_back(source);
    std::size_t head = 0;
    int ecc = 0;
    int far = source;
    while (head < queue.size()) {
        const int v = queue[head++];
        for (int u : graph.neighbors(v)) {
            if (dist[std::size_t(u)] == -1) {
                dist[std::size_t(u)] = dist[std::size_t(v)] + 1;
                if (dist[std::size_t(u)] > ecc) {
                    ecc = dist[std::size_t(u)];
                    far = u;
                }
                queue.push_back(u);
            }
        }
    }
    if (farthest) *farthest = far;
    return ecc;
}

}  // namespace

int diameter_largest_component(const Graph& graph, bool approx) {
    if (graph.num_nodes == 0) throw std::invalid_argument("diameter: empty graph");
    auto [comp, count] = connected_components(graph);
    std::vector<int> sizes(std::size_t(count), 0);
    for (int c : comp) ++sizes[std::size_t(c)];
    const int largest = int(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

    std::vector<int> members;
    for (int v = 0; v < graph.num_nodes; ++v) {
        if (comp[std::size_t(v)] == largest) members.push_back(v);
    }

    if (approx) {
        // double sweep: BFS from an arbitrary node, then from the farthest
        // node found; exact on trees, a lower bound in general
        int far = members.front();
        bfs_eccentricity(graph, members.front(), &far);
        return bfs_eccentricity(graph, far);
    }

    int diameter = 0;
    for (int v : members) diameter = std::max(diameter, bfs_eccentricity(graph, v));
    return diameter;
}

}  // namespace deepgraph
