#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deepgraph/gradcheck.hpp"
#include "deepgraph/graph.hpp"
#include "deepgraph/model.hpp"
#include "deepgraph/tgcl.hpp"

namespace deepgraph {

struct TrainConfig {
    ModelConfig model;
    TgclConfig tgcl;
    double lr = 0.001;
    double weight_decay = 0.0005;
    int iterations = 1500;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RunRecord {
    std::vector<double> train_loss;  // full objective per iteration
    std::vector<double> loss_gnn;    // cross-entropy term
    std::vector<double> loss_tgcl;   // contrastive term (0 when alpha = 0)
    std::vector<double> val_acc;
    double best_val_acc = 0.0;
    int best_iteration = -1;
    double test_acc = 0.0;
    double wall_seconds = 0.0;
    std::vector<std::pair<int, double>> layer_weights;  // from the best parameters
    long tgcl_pairs_checked = 0;
    bool diverged = false;
    int divergence_iteration = -1;
};

// Full-batch training with the overall objective
//   cross-entropy + 0.5 * weight_decay * sum ||W||^2 + alpha * TGCL,
// best-validation checkpointing, and the test accuracy evaluated once from
// the best parameters. Deterministic per seed.
RunRecord train(const Graph& graph, const TrainConfig& cfg);

double accuracy(const DenseMatrix& logits, const std::vector<int>& labels,
                const std::vector<std::uint8_t>& mask);

struct SweepRow {
    double value = 0.0;
    double test_acc = 0.0;
    double best_val_acc = 0.0;
};

enum class SweepParam { lambda, alpha };

// One train call per value, shared seed.
std::vector<SweepRow> sweep(const Graph& graph, TrainConfig cfg, SweepParam param,
                            const std::vector<double>& values);

struct GraphStatsReport {
    int num_nodes = 0;
    std::size_t num_edges = 0;
    int components = 0;
    int diameter = 0;
    int lambda_lo = 0;  // suggested lambda search range
    int lambda_hi = 0;
};

GraphStatsReport compute_stats(const Graph& graph, bool approx_diameter = false);

// Synthetic Erdos-Renyi graph with Gaussian features and uniform labels;
// every node is training-masked. Used by the gradient-check harness.
Graph erdos_renyi_classification(int n, double p, std::uint64_t seed, int feat_dim,
                                 int num_classes);

struct GradCheckHarnessReport {
    GradCheckReport fd;
    double threshold = 1e-4;
    bool passed = false;
};

// Finite-difference check of the full objective (dropout disabled, one frozen
// contrastive batch) on a small synthetic graph. Graphs above 50 nodes are
// rejected. `corrupt_group` >= 0 scales that parameter group's analytic
// gradient by 1.1 first, as a self-test of the oracle.
GradCheckHarnessReport gradcheck_harness(const Graph& graph, const TrainConfig& cfg,
                                         double eps = 1e-6, int min_coords = 200,
                                         int corrupt_group = -1);

struct MissingFeatureCell {
    double rate = 0.0;
    int depth = 0;
    double test_acc = 0.0;
};

struct MissingFeatureStudy {
    std::vector<MissingFeatureCell> cells;
    // per rate: (rate, best depth, best accuracy)
    std::vector<std::tuple<double, int, double>> best_per_rate;
};

MissingFeatureStudy missing_feature_study(const Graph& graph, TrainConfig cfg,
                                          const std::vector<double>& rates,
                                          const std::vector<int>& depths);

}  // namespace deepgraph
