#include "deepgraph/train.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "deepgraph/datasets.hpp"
#include "deepgraph/ops.hpp"
#include "deepgraph/optim.hpp"

namespace deepgraph {

namespace {

constexpr std::uint64_t kInitStream = 0x1217;
constexpr std::uint64_t kDropoutStream = 0xD209;
constexpr std::uint64_t kBatchStream = 0xBA7C;
constexpr std::uint64_t kGradCheckStream = 0x9CC0;

double weight_decay_term(ModelParams& params, double wd, bool accumulate_grads) {
    double l2 = 0.0;
    for (Parameter* p : params.all()) {
        l2 += sum_squares(p->value);
        if (accumulate_grads) add_scaled(p->grad, p->value, wd);
    }
    return 0.5 * wd * l2;
}

// Embedding head: identity or a jointly trained linear map.
DenseMatrix project_embeddings(const DenseMatrix& h, const ModelParams& params) {
    if (!params.projection) return h;
    return matmul(h, params.projection->value);
}

}  // namespace

void TrainConfig::validate() const {
    model.validate();
    tgcl.validate();
    if (lr <= 0.0) throw std::invalid_argument("train: lr must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
    if (iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
}

double accuracy(const DenseMatrix& logits, const std::vector<int>& labels,
                const std::vector<std::uint8_t>& mask) {
    int correct = 0, total = 0;
    for (int i = 0; i < logits.rows; ++i) {
        if (!mask[std::size_t(i)]) continue;
        const double* r = logits.row(i);
        int arg = 0;
        for (int j = 1; j < logits.cols; ++j) {
            if (r[j] > r[arg]) arg = j;
        }
        correct += arg == labels[std::size_t(i)] ? 1 : 0;
        ++total;
    }
    return total == 0 ? 0.0 : double(correct) / double(total);
}

RunRecord train(const Graph& graph, const TrainConfig& cfg_in) {
    TrainConfig cfg = cfg_in;
    cfg.model.num_classes = graph.num_classes;
    cfg.validate();
    if (graph.labels.empty()) throw std::invalid_argument("train: graph has no labels");

    const auto t_start = std::chrono::steady_clock::now();
    const NormalizedAdjacency adj = normalize(graph);
    const SparseMatrix features = SparseMatrix::from_dense(graph.features);

    Rng rng_init = Rng::stream(cfg.seed, kInitStream);
    Rng rng_drop = Rng::stream(cfg.seed, kDropoutStream);
    Rng rng_batch = Rng::stream(cfg.seed, kBatchStream);

    ModelParams params =
        ModelParams::init(cfg.model, graph.features.cols, rng_init, cfg.tgcl.linear_projection);
    RmsProp optimizer;

    RunRecord rec;
    std::vector<DenseMatrix> best_weights;
    auto snapshot = [&]() {
        best_weights.clear();
        for (Parameter* p : params.all()) best_weights.push_back(p->value);
    };
    snapshot();
    rec.best_val_acc = -1.0;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        ForwardCache cache;
        forward(cfg.model, adj, features, params, rng_drop, true, &cache);
        auto [ce_loss, dlogits] = softmax_cross_entropy(cache.logits, graph.labels, graph.train_mask);

        const double wd_loss = weight_decay_term(params, cfg.weight_decay, true);

        double tgcl_value = 0.0;
        DenseMatrix d_hidden;
        bool have_tgcl = false;
        if (cfg.tgcl.alpha > 0.0) {
            const ContrastBatch batch = sample_batch(graph, rng_batch, cfg.tgcl);
            rec.tgcl_pairs_checked += batch.pairs_checked;
            const DenseMatrix z = project_embeddings(cache.final_hidden(), params);
            TgclResult tg = tgcl_loss(z, batch, cfg.tgcl.tau, true);
            tgcl_value = tg.loss;
            if (params.projection) {
                add_scaled(params.projection->grad, matmul_tn(cache.final_hidden(), tg.dz),
                           cfg.tgcl.alpha);
                d_hidden = matmul_nt(tg.dz, params.projection->value);
                for (double& v : d_hidden.data) v *= cfg.tgcl.alpha;
            } else {
                d_hidden = std::move(tg.dz);
                for (double& v : d_hidden.data) v *= cfg.tgcl.alpha;
            }
            have_tgcl = true;
        }

        const double total = ce_loss + wd_loss + cfg.tgcl.alpha * tgcl_value;
        if (!std::isfinite(total)) {
            rec.diverged = true;
            rec.divergence_iteration = iter;
            break;
        }

        backward(cfg.model, adj, features, params, cache, dlogits, have_tgcl ? &d_hidden : nullptr);
        auto plist = params.all();
        optimizer.step(plist, cfg.lr);

        // clean evaluation pass (dropout off)
        const DenseMatrix eval_logits =
            forward(cfg.model, adj, features, params, rng_drop, false, nullptr);
        const double vacc = accuracy(eval_logits, graph.labels, graph.val_mask);

        rec.train_loss.push_back(total);
        rec.loss_gnn.push_back(ce_loss);
        rec.loss_tgcl.push_back(tgcl_value);
        rec.val_acc.push_back(vacc);
        if (vacc > rec.best_val_acc) {
            rec.best_val_acc = vacc;
            rec.best_iteration = iter;
            snapshot();
        }
    }

    // restore the best-validation parameters and evaluate test accuracy once
    {
        auto plist = params.all();
        for (std::size_t i = 0; i < plist.size(); ++i) plist[i]->value = best_weights[i];
    }
    ForwardCache final_cache;
    const DenseMatrix test_logits =
        forward(cfg.model, adj, features, params, rng_drop, false, &final_cache);
    rec.test_acc = accuracy(test_logits, graph.labels, graph.test_mask);
    if (rec.best_val_acc < 0.0) rec.best_val_acc = accuracy(test_logits, graph.labels, graph.val_mask);
    rec.layer_weights = layer_weight_report(final_cache);

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
}

std::vector<SweepRow> sweep(const Graph& graph, TrainConfig cfg, SweepParam param,
                            const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep: need at least one value");
    std::vector<SweepRow> rows;
    for (double v : values) {
        if (param == SweepParam::lambda) {
            cfg.model.lambda = v;
        } else {
            cfg.tgcl.alpha = v;
        }
        const RunRecord rec = train(graph, cfg);
        if (rec.diverged) {
            throw std::runtime_error("sweep: training diverged at value " + std::to_string(v));
        }
        rows.push_back({v, rec.test_acc, rec.best_val_acc});
    }
    return rows;
}

GraphStatsReport compute_stats(const Graph& graph, bool approx_diameter) {
    GraphStatsReport r;
    r.num_nodes = graph.num_nodes;
    r.num_edges = graph.num_edges();
    r.components = connected_components(graph).second;
    r.diameter = diameter_largest_component(graph, approx_diameter);
    r.lambda_lo = std::max(1, r.diameter - 5);
    r.lambda_hi = r.diameter + 5;
    return r;
}

Graph erdos_renyi_classification(int n, double p, std::uint64_t seed, int feat_dim,
                                 int num_classes) {
    if (n < 1 || p < 0.0 || p > 1.0) throw std::invalid_argument("erdos_renyi: bad arguments");
    Rng rng = Rng::stream(seed, 0xE2D05);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    Graph g = Graph::from_edges(n, std::move(edges));
    g.features = DenseMatrix(n, feat_dim);
    for (double& v : g.features.data) v = rng.normal();
    g.labels.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) g.labels[std::size_t(i)] = rng.uniform_int(num_classes);
    g.num_classes = num_classes;
    g.train_mask.assign(std::size_t(n), 1);
    g.val_mask.assign(std::size_t(n), 0);
    g.test_mask.assign(std::size_t(n), 0);
    return g;
}

GradCheckHarnessReport gradcheck_harness(const Graph& graph, const TrainConfig& cfg_in,
                                         double eps, int min_coords, int corrupt_group) {
    if (graph.num_nodes > 50) {
        throw std::invalid_argument("gradcheck: graph must have at most 50 nodes");
    }
    TrainConfig cfg = cfg_in;
    cfg.model.num_classes = graph.num_classes;
    cfg.model.dropout_rate = 0.0;  // loss must be deterministic for differencing
    cfg.validate();

    const NormalizedAdjacency adj = normalize(graph);
    const SparseMatrix features = SparseMatrix::from_dense(graph.features);

    Rng rng_init = Rng::stream(cfg.seed, kInitStream);
    Rng rng_batch = Rng::stream(cfg.seed, kBatchStream);
    Rng rng_coords = Rng::stream(cfg.seed, kGradCheckStream);
    ModelParams params =
        ModelParams::init(cfg.model, graph.features.cols, rng_init, cfg.tgcl.linear_projection);

    // one frozen batch keeps the contrastive term deterministic
    ContrastBatch batch;
    if (cfg.tgcl.alpha > 0.0) batch = sample_batch(graph, rng_batch, cfg.tgcl);

    Rng rng_unused(0);
    auto loss_at_params = [&]() {
        ForwardCache cache;
        forward(cfg.model, adj, features, params, rng_unused, false, &cache);
        const auto ce = softmax_cross_entropy(cache.logits, graph.labels, graph.train_mask);
        double total = ce.loss + weight_decay_term(params, cfg.weight_decay, false);
        if (cfg.tgcl.alpha > 0.0) {
            const DenseMatrix z = project_embeddings(cache.final_hidden(), params);
            total += cfg.tgcl.alpha * tgcl_loss(z, batch, cfg.tgcl.tau, false).loss;
        }
        return total;
    };

    // analytic gradients at the base point
    {
        ForwardCache cache;
        forward(cfg.model, adj, features, params, rng_unused, false, &cache);
        const auto ce = softmax_cross_entropy(cache.logits, graph.labels, graph.train_mask);
        weight_decay_term(params, cfg.weight_decay, true);
        DenseMatrix d_hidden;
        bool have_tgcl = false;
        if (cfg.tgcl.alpha > 0.0) {
            const DenseMatrix z = project_embeddings(cache.final_hidden(), params);
            TgclResult tg = tgcl_loss(z, batch, cfg.tgcl.tau, true);
            if (params.projection) {
                add_scaled(params.projection->grad, matmul_tn(cache.final_hidden(), tg.dz),
                           cfg.tgcl.alpha);
                d_hidden = matmul_nt(tg.dz, params.projection->value);
                for (double& v : d_hidden.data) v *= cfg.tgcl.alpha;
            } else {
                d_hidden = std::move(tg.dz);
                for (double& v : d_hidden.data) v *= cfg.tgcl.alpha;
            }
            have_tgcl = true;
        }
        backward(cfg.model, adj, features, params, cache, ce.dlogits,
                 have_tgcl ? &d_hidden : nullptr);
    }

    auto plist = params.all();
    if (corrupt_group >= 0 && corrupt_group < int(plist.size())) {
        for (double& g : plist[std::size_t(corrupt_group)]->grad.data) g *= 1.1;
    }

    GradCheckHarnessReport report;
    report.fd = finite_difference_check(loss_at_params, plist, eps, min_coords, rng_coords);
    report.passed = report.fd.max_relative_error <= report.threshold;
    return report;
}

MissingFeatureStudy missing_feature_study(const Graph& graph, TrainConfig cfg,
                                          const std::vector<double>& rates,
                                          const std::vector<int>& depths) {
    if (rates.empty() || depths.empty()) {
        throw std::invalid_argument("missing_feature_study: empty rates or depths");
    }
    MissingFeatureStudy study;
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        const Graph masked = mask_features(graph, rates[ri], cfg.seed + ri);
        double best_acc = -1.0;
        int best_depth = depths.front();
        for (int depth : depths) {
            cfg.model.depth = depth;
            const RunRecord rec = train(masked, cfg);
            study.cells.push_back({rates[ri], depth, rec.test_acc});
            if (rec.test_acc > best_acc) {
                best_acc = rec.test_acc;
                best_depth = depth;
            }
        }
        study.best_per_rate.emplace_back(rates[ri], best_depth, best_acc);
    }
    return study;
}

}  // namespace deepgraph
