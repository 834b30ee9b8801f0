#pragma once

#include <cstdint>
#include <string>

#include "deepgraph/graph.hpp"

namespace deepgraph {

struct LoadStats {
    int dropped_unknown_refs = 0;
    int dropped_self_loops = 0;
    int dropped_duplicate_edges = 0;
};

// Whole file as text; files whose first two bytes are the gzip magic are
// inflated transparently.
std::string read_text_file(const std::string& path);

// Classic citation-network distribution:
//   content rows:  <id> <d binary attributes> <class label>
//   cites rows:    <cited id> <citing id>
// Labels are mapped to dense ids in first-occurrence order; edges referencing
// unknown ids are dropped and counted.
Graph load_citation(const std::string& content_path, const std::string& cites_path,
                    LoadStats* stats = nullptr);

// Line-oriented canonical text format (see save_canonical for the layout).
Graph load_canonical(const std::string& path, LoadStats* stats = nullptr);
void save_canonical(const Graph& graph, const std::string& path);

// Two concentric circles (radii 1 and 0.5, equal point counts, Gaussian
// coordinate noise); nodes within `threshold` euclidean distance are
// connected. Coordinates are the node features, circle membership the label.
Graph two_circles(int num_points, double noise, double threshold, std::uint64_t seed);

// Disjoint train/val masks with round(frac*n) nodes each, remainder test.
void random_split(Graph& graph, double train_frac, double val_frac, std::uint64_t seed);

// Copy of the graph with exactly floor(p/100 * n * d) feature entries zeroed,
// sampled without replacement.
Graph mask_features(const Graph& graph, double p_percent, std::uint64_t seed);

}  // namespace deepgraph
