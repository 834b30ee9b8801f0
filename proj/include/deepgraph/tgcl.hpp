#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepgraph/graph.hpp"
#include "deepgraph/matrix.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

struct TgclConfig {
    double alpha = 0.0;            // 0 disables the term exactly
    int per_class_centrals = 10;
    int positives_per_central = 5;
    double tau = 1.0;
    bool linear_projection = false;  // identity embedding head by default

    void validate() const;
};

// Sampled contrastive batch. Positives are 1-hop neighbors of their central;
// negatives are the other batch members that are non-adjacent to the central.
struct ContrastBatch {
    std::vector<int> centrals;
    std::vector<std::vector<int>> positives;
    std::vector<std::vector<int>> negatives;
    std::vector<std::vector<double>> sigma;   // per (central, positive)
    std::vector<std::vector<double>> gamma;   // per (central, negative)
    long pairs_checked = 0;                   // sigma/gamma range assertions performed
    int skipped_empty_classes = 0;
    int dropped_isolated_centrals = 0;
};

// sigma_ij = 1 - dist(A_i, A_j)/n for an adjacent pair; in (0, 1].
double sigma_weight(const Graph& graph, int i, int j);
// gamma_ik = 1 + dist(A_i, A_k)/n for a non-adjacent pair; in (1, 2].
double gamma_weight(const Graph& graph, int i, int k);

// Draws up to per_class_centrals training nodes per class, up to
// positives_per_central 1-hop neighbors each, and precomputes sigma/gamma.
// Every weight is range-asserted as it is computed.
ContrastBatch sample_batch(const Graph& graph, Rng& rng, const TgclConfig& cfg);

// Batch with every node of degree >= 1 as central, all neighbors as
// positives, and the full non-adjacent complement as negatives.
ContrastBatch full_batch(const Graph& graph);

struct TgclResult {
    double loss = 0.0;
    DenseMatrix dz;
};

// Loss over the batch with f(a,b) = exp(cos(a,b)/tau):
// mean over centrals of the mean over their positives of
//   -log( sigma f(z_i,z_j) / (sigma f(z_i,z_j) + sum_k gamma f(z_i,z_k)) ).
// Centrals with no negatives contribute 0.
TgclResult tgcl_loss(const DenseMatrix& z, const ContrastBatch& batch, double tau,
                     bool want_grad = true);

// Exact double expectation with the full complement as negative set.
// Guarded to n <= 2000.
double tgcl_loss_bruteforce(const Graph& graph, const DenseMatrix& z, double tau);

struct PairnormGap {
    double exact = 0.0;      // log(1 + x), x = exp(|zi-zj|^2 - |zi-zk|^2)
    double approx = 0.0;     // |zi-zj|^2 - |zi-zk|^2
    double gap_bound = 0.0;  // 1/x, valid bound on |exact - approx| for x >= 1
};

PairnormGap pairnorm_special_case(std::span<const double> zi, std::span<const double> zj,
                                  std::span<const double> zk);

// -loss + mean over nodes with a non-empty complement of log|complement|.
// Throws when no node has a non-adjacent non-self node (complete graph).
double mi_bound_diagnostic(const Graph& graph, double loss);

}  // namespace deepgraph
