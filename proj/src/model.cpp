#include "deepgraph/model.hpp"

#include <cmath>
#include <stdexcept>

namespace deepgraph {

Variant variant_from_string(const std::string& s) {
    if (s == "vanilla") return Variant::vanilla;
    if (s == "resnet") return Variant::resnet;
    if (s == "wdg") return Variant::wdg;
    if (s == "wdg_s") return Variant::wdg_s;
    throw std::invalid_argument("unknown variant: " + s);
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::vanilla: return "vanilla";
        case Variant::resnet: return "resnet";
        case Variant::wdg: return "wdg";
        case Variant::wdg_s: return "wdg_s";
    }
    return "?";
}

void ModelConfig::validate() const {
    if (depth < 2) throw std::invalid_argument("model: depth must be >= 2");
    if (hidden_dim < 1) throw std::invalid_argument("model: hidden_dim must be >= 1");
    if (num_classes < 1) throw std::invalid_argument("model: num_classes must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("model: dropout_rate must be in [0,1)");
    }
    const bool needs_lambda = variant == Variant::wdg || variant == Variant::wdg_s;
    if (needs_lambda && lambda <= 0.0) {
        throw std::invalid_argument("model: lambda must be > 0 for wdg variants");
    }
}

double decay_factor(int layer, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("decay_factor: lambda must be > 0");
    return std::exp(-double(layer) / lambda);
}

double layer_cosine_similarity(const DenseMatrix& h1, const DenseMatrix& hl) {
    if (!h1.same_shape(hl)) shape_error("layer_cosine_similarity", h1, hl);
    if (h1.rows == 0) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < h1.rows; ++i) {
        const double* a = h1.row(i);
        const double* b = hl.row(i);
        double sa = 0.0, sb = 0.0, dot = 0.0;
        for (int j = 0; j < h1.cols; ++j) {
            sa += a[j] * a[j];
            sb += b[j] * b[j];
            dot += a[j] * b[j];
        }
        const double na = std::sqrt(sa);
        const double nb = std::sqrt(sb);
        if (na == 0.0 || nb == 0.0) continue;
        acc += dot / (na * nb);
    }
    return acc / double(h1.rows);
}

DenseMatrix gcn_layer(const NormalizedAdjacency& adj, const DenseMatrix& h, const Parameter& w,
                      bool activate) {
    DenseMatrix t = spmm(adj, matmul(h, w.value));
    return activate ? relu(t) : t;
}

std::pair<DenseMatrix, double> residual_combine(Variant variant, const DenseMatrix& h_tilde,
                                                const DenseMatrix& h_prev2, const DenseMatrix& h1,
                                                int l, double lambda) {
    if (variant == Variant::vanilla) return {h_tilde, 1.0};
    if (!h_tilde.same_shape(h_prev2)) shape_error("residual_combine", h_tilde, h_prev2);
    double w = 1.0;
    if (variant == Variant::wdg) {
        w = std::exp(layer_cosine_similarity(h1, h_tilde) - double(l) / lambda);
    } else if (variant == Variant::wdg_s) {
        w = decay_factor(l, lambda);
    }
    DenseMatrix out = h_prev2;
    add_scaled(out, h_tilde, w);
    return {std::move(out), w};
}

ModelParams ModelParams::init(const ModelConfig& cfg, int in_dim, Rng& rng, bool with_projection) {
    cfg.validate();
    ModelParams p;
    p.weights.reserve(std::size_t(cfg.depth) + 1);
    p.weights.emplace_back("W0", glorot_uniform(in_dim, cfg.hidden_dim, rng));
    for (int l = 1; l < cfg.depth; ++l) {
        p.weights.emplace_back("W" + std::to_string(l),
                               glorot_uniform(cfg.hidden_dim, cfg.hidden_dim, rng));
    }
    p.weights.emplace_back("W" + std::to_string(cfg.depth) + "_clf",
                           glorot_uniform(cfg.hidden_dim, cfg.num_classes, rng));
    if (with_projection) {
        p.projection = Parameter("W_proj", glorot_uniform(cfg.hidden_dim, cfg.hidden_dim, rng));
    }
    return p;
}

std::vector<Parameter*> ModelParams::all() {
    std::vector<Parameter*> out;
    out.reserve(weights.size() + 1);
    for (Parameter& w : weights) out.push_back(&w);
    if (projection) out.push_back(&*projection);
    return out;
}

DenseMatrix forward(const ModelConfig& cfg, const NormalizedAdjacency& adj,
                    const SparseMatrix& features, ModelParams& params, Rng& rng, bool training,
                    ForwardCache* cache) {
    cfg.validate();
    if (int(params.weights.size()) != cfg.depth + 1) {
        throw std::invalid_argument("forward: parameter count does not match depth");
    }
    const double rate = cfg.dropout_rate;
    const bool drop = training && rate > 0.0;

    if (cache) {
        cache->variant = cfg.variant;
        cache->lambda = cfg.lambda;
        cache->dropout_rate = rate;
        cache->training = drop;
        cache->layers.assign(std::size_t(cfg.depth), LayerCache{});
    }

    // layer 1: d -> h
    DenseMatrix h;
    if (drop) {
        SparseMatrix x1 = dropout_sparse(features, rate, rng, true);
        h = spmm(adj, sparse_matmul(x1, params.weights[0].value));
        if (cache) cache->input_dropped = std::move(x1);
    } else {
        h = spmm(adj, sparse_matmul(features, params.weights[0].value));
    }
    relu_inplace(h);
    // only the cache-free wdg path needs its own copy of H^{(1)}
    const DenseMatrix h1_snapshot =
        (!cache && cfg.variant == Variant::wdg) ? h : DenseMatrix();
    if (cache) {
        cache->layers[0].h_tilde = h;
        cache->layers[0].hidden = h;
    }

    DenseMatrix h_prev;  // H^{(l-2)} relative to the layer being built
    for (int l = 2; l <= cfg.depth; ++l) {
        LayerCache* lc = cache ? &cache->layers[std::size_t(l - 1)] : nullptr;
        DenseMatrix h_tilde;
        if (drop) {
            std::vector<std::uint8_t> mask;
            DenseMatrix x = dropout(h, rate, rng, true, &mask);
            h_tilde = spmm(adj, matmul(x, params.weights[std::size_t(l - 1)].value));
            if (lc) {
                lc->dropped_in = std::move(x);
                lc->drop_mask = std::move(mask);
            }
        } else {
            h_tilde = spmm(adj, matmul(h, params.weights[std::size_t(l - 1)].value));
        }
        relu_inplace(h_tilde);

        const bool res = l >= 3 && cfg.variant != Variant::vanilla;
        DenseMatrix h_next;
        double weight = 1.0;
        if (res) {
            const DenseMatrix& h1 = cache ? cache->h1() : h1_snapshot;
            auto [combined, w] = residual_combine(cfg.variant, h_tilde, h_prev, h1, l, cfg.lambda);
            h_next = std::move(combined);
            weight = w;
            if (lc) lc->h_tilde = std::move(h_tilde);
        } else {
            if (lc) lc->h_tilde = h_tilde;
            h_next = std::move(h_tilde);
        }
        if (lc) {
            lc->residual = res;
            lc->weight = weight;
            if (res && cfg.variant == Variant::wdg) {
                lc->cosine = std::log(weight) + double(l) / cfg.lambda;
            }
            lc->hidden = h_next;
        }
        h_prev = std::move(h);
        h = std::move(h_next);
    }

    // classifier: h -> c, no activation, outside the residual chain
    DenseMatrix logits;
    if (drop) {
        std::vector<std::uint8_t> clf_mask;
        DenseMatrix xc = dropout(h, rate, rng, true, &clf_mask);
        logits = spmm(adj, matmul(xc, params.weights[std::size_t(cfg.depth)].value));
        if (cache) {
            cache->clf_dropped = std::move(xc);
            cache->clf_mask = std::move(clf_mask);
        }
    } else {
        logits = spmm(adj, matmul(h, params.weights[std::size_t(cfg.depth)].value));
    }
    if (cache) cache->logits = logits;
    return logits;
}

namespace {

// d(mean-row-cosine)/d(h1) and /d(hl), scaled by dcos, accumulated in place.
void cosine_backward(const DenseMatrix& h1, const DenseMatrix& hl, double dcos, DenseMatrix& dh1,
                     DenseMatrix& dhl) {
    const int n = h1.rows, k = h1.cols;
    const double scale = dcos / double(n);
    for (int i = 0; i < n; ++i) {
        const double* a = h1.row(i);
        const double* b = hl.row(i);
        const double na = row_norm(a, k);
        const double nb = row_norm(b, k);
        if (na == 0.0 || nb == 0.0) continue;
        double dot = 0.0;
        for (int j = 0; j < k; ++j) dot += a[j] * b[j];
        const double c = dot / (na * nb);
        double* ga = dh1.row(i);
        double* gb = dhl.row(i);
        const double inv_ab = 1.0 / (na * nb);
        const double ca = c / (na * na);
        const double cb = c / (nb * nb);
        for (int j = 0; j < k; ++j) {
            ga[j] += scale * (b[j] * inv_ab - ca * a[j]);
            gb[j] += scale * (a[j] * inv_ab - cb * b[j]);
        }
    }
}

}  // namespace

void backward(const ModelConfig& cfg, const NormalizedAdjacency& adj, const SparseMatrix& features,
              ModelParams& params, const ForwardCache& cache, const DenseMatrix& dlogits,
              const DenseMatrix* d_final_hidden) {
    const int L = cfg.depth;
    if (int(cache.layers.size()) != L) throw std::invalid_argument("backward: cache depth mismatch");
    const bool drop = cache.training;
    const double rate = cache.dropout_rate;

    // per-layer gradients with respect to the post-residual hidden states
    std::vector<DenseMatrix> dh(std::size_t(L), DenseMatrix{});
    for (int l = 0; l < L; ++l) {
        const DenseMatrix& ref = cache.layers[std::size_t(l)].hidden;
        dh[std::size_t(l)] = DenseMatrix(ref.rows, ref.cols);
    }

    // classifier
    {
        const DenseMatrix& xc = drop ? cache.clf_dropped : cache.final_hidden();
        DenseMatrix dq = spmm(adj, dlogits);  // A is symmetric
        add_scaled(params.weights[std::size_t(L)].grad, matmul_tn(xc, dq), 1.0);
        DenseMatrix dx = matmul_nt(dq, params.weights[std::size_t(L)].value);
        dh[std::size_t(L - 1)] = drop ? dropout_backward(dx, rate, cache.clf_mask) : std::move(dx);
    }
    if (d_final_hidden) add_scaled(dh[std::size_t(L - 1)], *d_final_hidden, 1.0);

    const DenseMatrix& h1 = cache.h1();
    for (int l = L; l >= 2; --l) {
        const LayerCache& lc = cache.layers[std::size_t(l - 1)];
        DenseMatrix& g = dh[std::size_t(l - 1)];

        DenseMatrix dtilde;
        if (lc.residual) {
            add_scaled(dh[std::size_t(l - 3)], g, 1.0);  // + H^{(l-2)} path
            if (cache.variant == Variant::resnet) {
                dtilde = std::move(g);
            } else {
                dtilde = DenseMatrix(g.rows, g.cols);
                add_scaled(dtilde, g, lc.weight);
                if (cache.variant == Variant::wdg && !cfg.stop_grad_sim) {
                    const double dw = frobenius_dot(g, lc.h_tilde);
                    const double dcos = dw * lc.weight;  // w = e^{cos - l/lambda}
                    cosine_backward(h1, lc.h_tilde, dcos, dh[0], dtilde);
                }
            }
        } else {
            dtilde = std::move(g);
        }

        DenseMatrix dt = relu_backward(dtilde, lc.h_tilde);
        DenseMatrix dq = spmm(adj, dt);
        const DenseMatrix& x = drop ? lc.dropped_in : cache.layers[std::size_t(l - 2)].hidden;
        add_scaled(params.weights[std::size_t(l - 1)].grad, matmul_tn(x, dq), 1.0);
        DenseMatrix dx = matmul_nt(dq, params.weights[std::size_t(l - 1)].value);
        if (drop) {
            add_scaled(dh[std::size_t(l - 2)], dropout_backward(dx, rate, lc.drop_mask), 1.0);
        } else {
            add_scaled(dh[std::size_t(l - 2)], dx, 1.0);
        }
    }

    // layer 1; gradients stop at the weights (input features are constants)
    {
        DenseMatrix dt = relu_backward(dh[0], cache.layers[0].h_tilde);
        DenseMatrix dq = spmm(adj, dt);
        const SparseMatrix& x = drop ? cache.input_dropped : features;
        sparse_matmul_grad_w(x, dq, params.weights[0].grad);
    }
}

DenseMatrix unrolled_expansion(const ForwardCache& cache) {
    if (cache.variant == Variant::vanilla) throw std::invalid_argument("no residual chain");
    const int L = int(cache.layers.size());
    // chain start: the deepest layer of matching parity without a residual
    int start = (L % 2 == 0) ? 2 : 1;
    if (L <= 2) return cache.layers[std::size_t(L - 1)].hidden;
    DenseMatrix acc = cache.layers[std::size_t(start - 1)].hidden;
    for (int l = start + 2; l <= L; l += 2) {
        const LayerCache& lc = cache.layers[std::size_t(l - 1)];
        add_scaled(acc, lc.h_tilde, lc.weight);
    }
    return acc;
}

std::vector<std::pair<int, double>> layer_weight_report(const ForwardCache& cache) {
    std::vector<std::pair<int, double>> out;
    for (int l = 1; l <= int(cache.layers.size()); ++l) {
        const LayerCache& lc = cache.layers[std::size_t(l - 1)];
        if (lc.residual) out.emplace_back(l, lc.weight);
    }
    return out;
}

double node_influence(const Graph& graph, int source, int center, int hops) {
    if (source < 0 || source >= graph.num_nodes || center < 0 || center >= graph.num_nodes) {
        throw std::out_of_range("node_influence: node id out of range");
    }
    if (hops < 0) throw std::invalid_argument("node_influence: hops must be >= 0");
    // basis perturbation at the source, propagated through the row-normalized
    // self-looped averaging operator
    std::vector<double> v(std::size_t(graph.num_nodes), 0.0);
    v[std::size_t(source)] = 1.0;
    std::vector<double> next(v.size());
    for (int step = 0; step < hops; ++step) {
        for (int i = 0; i < graph.num_nodes; ++i) {
            const double inv_deg = 1.0 / double(graph.degree(i) + 1);
            double acc = v[std::size_t(i)];  // self-loop
            for (int j : graph.neighbors(i)) acc += v[std::size_t(j)];
            next[std::size_t(i)] = acc * inv_deg;
        }
        std::swap(v, next);
    }
    return std::fabs(v[std::size_t(center)]);
}

}  // namespace deepgraph
