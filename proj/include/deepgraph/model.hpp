#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deepgraph/graph.hpp"
#include "deepgraph/matrix.hpp"
#include "deepgraph/ops.hpp"
#include "deepgraph/optim.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

enum class Variant { vanilla, resnet, wdg, wdg_s };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

// depth counts hidden GCN layers; the h -> c classifier layer sits on top of
// the stack, outside the residual chain and unactivated.
struct ModelConfig {
    int depth = 2;
    int hidden_dim = 50;
    int num_classes = 0;
    Variant variant = Variant::vanilla;
    double lambda = 0.0;  // required for wdg / wdg_s
    double dropout_rate = 0.5;
    bool stop_grad_sim = false;  // treat the cosine weight as a constant in backward

    void validate() const;  // throws std::invalid_argument
};

// e^{-l/lambda}
double decay_factor(int layer, double lambda);

// Mean over rows of the cosine between matching rows; a row pair where either
// norm is zero contributes 0.
double layer_cosine_similarity(const DenseMatrix& h1, const DenseMatrix& hl);

// One GCN layer sigma(A * h * w); activation skipped when activate is false.
DenseMatrix gcn_layer(const NormalizedAdjacency& adj, const DenseMatrix& h, const Parameter& w,
                      bool activate);

// Applies the variant's residual rule at layer l (>= 3 in the stack):
//   vanilla: h_tilde                         weight 1 (no addition)
//   resnet : h_tilde + h_prev2               weight 1
//   wdg    : e^{cos(h1,h_tilde) - l/lambda} * h_tilde + h_prev2
//   wdg_s  : e^{-l/lambda} * h_tilde + h_prev2
std::pair<DenseMatrix, double> residual_combine(Variant variant, const DenseMatrix& h_tilde,
                                                const DenseMatrix& h_prev2, const DenseMatrix& h1,
                                                int l, double lambda);

struct LayerCache {
    // input to this layer after dropout (dense path; empty for layer 1, whose
    // dropped sparse input is stored in ForwardCache)
    DenseMatrix dropped_in;
    std::vector<std::uint8_t> drop_mask;
    DenseMatrix h_tilde;  // post-activation, before the residual
    DenseMatrix hidden;   // post-residual output of the layer
    double weight = 1.0;  // applied residual weight w_l
    double cosine = 0.0;  // recorded for wdg
    bool residual = false;
};

struct ForwardCache {
    Variant variant = Variant::vanilla;
    double lambda = 0.0;
    double dropout_rate = 0.0;
    bool training = false;
    SparseMatrix input_dropped;            // layer 1 input after dropout
    std::vector<LayerCache> layers;        // index 0 holds layer 1
    DenseMatrix clf_dropped;               // classifier input after dropout
    std::vector<std::uint8_t> clf_mask;
    DenseMatrix logits;

    const DenseMatrix& h1() const { return layers.front().hidden; }
    const DenseMatrix& final_hidden() const { return layers.back().hidden; }
};

// Weight matrices W_0 (d x h), W_1..W_{L-1} (h x h), W_L (h x c), plus an
// optional embedding projection used by the contrastive head.
struct ModelParams {
    std::vector<Parameter> weights;
    std::optional<Parameter> projection;

    static ModelParams init(const ModelConfig& cfg, int in_dim, Rng& rng, bool with_projection);
    std::vector<Parameter*> all();
};

DenseMatrix forward(const ModelConfig& cfg, const NormalizedAdjacency& adj,
                    const SparseMatrix& features, ModelParams& params, Rng& rng, bool training,
                    ForwardCache* cache);

// Accumulates parameter gradients for dL/dlogits plus an optional extra
// gradient arriving at the final hidden layer (the contrastive term).
void backward(const ModelConfig& cfg, const NormalizedAdjacency& adj, const SparseMatrix& features,
              ModelParams& params, const ForwardCache& cache, const DenseMatrix& dlogits,
              const DenseMatrix* d_final_hidden);

// Recomputes the final hidden state as the explicit weighted sum of the
// residual chain terms; must match the recursive forward. Throws
// std::invalid_argument for a cache produced by the vanilla variant.
DenseMatrix unrolled_expansion(const ForwardCache& cache);

// (layer index, applied residual weight) for every layer where the residual
// rule fired; empty for vanilla.
std::vector<std::pair<int, double>> layer_weight_report(const ForwardCache& cache);

// Influence of source on center after `hops` applications of the self-looped
// neighbor-averaging operator with identity weights and activation.
double node_influence(const Graph& graph, int source, int center, int hops);

}  // namespace deepgraph
