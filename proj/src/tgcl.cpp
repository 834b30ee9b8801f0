#include "deepgraph/tgcl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace deepgraph {

void TgclConfig::validate() const {
    if (alpha < 0.0) throw std::invalid_argument("tgcl: alpha must be >= 0");
    if (per_class_centrals < 1) throw std::invalid_argument("tgcl: per_class_centrals must be >= 1");
    if (positives_per_central < 1) {
        throw std::invalid_argument("tgcl: positives_per_central must be >= 1");
    }
    if (tau <= 0.0) throw std::invalid_argument("tgcl: tau must be > 0");
}

double sigma_weight(const Graph& graph, int i, int j) {
    if (!graph.adjacent(i, j)) {
        throw std::invalid_argument("sigma_weight: (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") is not an edge");
    }
    return 1.0 - double(hamming_distance(graph, i, j)) / double(graph.num_nodes);
}

double gamma_weight(const Graph& graph, int i, int k) {
    if (i == k || graph.adjacent(i, k)) {
        throw std::invalid_argument("gamma_weight: (" + std::to_string(i) + "," + std::to_string(k) +
                                    ") is not a non-adjacent pair");
    }
    return 1.0 + double(hamming_distance(graph, i, k)) / double(graph.num_nodes);
}

namespace {

void assert_sigma_range(double s, int i, int j) {
    if (!(s > 0.0 && s <= 1.0)) {
        throw std::logic_error("sigma out of (0,1] for pair (" + std::to_string(i) + "," +
                               std::to_string(j) + "): " + std::to_string(s));
    }
}

void assert_gamma_range(double g, int i, int k) {
    if (!(g > 1.0 && g <= 2.0)) {
        throw std::logic_error("gamma out of (1,2] for pair (" + std::to_string(i) + "," +
                               std::to_string(k) + "): " + std::to_string(g));
    }
}

void finalize_weights(const Graph& graph, ContrastBatch& batch) {
    // batch members = centrals plus all sampled positives
    std::vector<int> members = batch.centrals;
    for (const auto& pos : batch.positives) members.insert(members.end(), pos.begin(), pos.end());
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());

    batch.negatives.resize(batch.centrals.size());
    batch.sigma.resize(batch.centrals.size());
    batch.gamma.resize(batch.centrals.size());
    for (std::size_t c = 0; c < batch.centrals.size(); ++c) {
        const int vi = batch.centrals[c];
        for (int vj : batch.positives[c]) {
            const double s = sigma_weight(graph, vi, vj);
            assert_sigma_range(s, vi, vj);
            ++batch.pairs_checked;
            batch.sigma[c].push_back(s);
        }
        for (int u : members) {
            if (u == vi || graph.adjacent(vi, u)) continue;
            const double g = gamma_weight(graph, vi, u);
            assert_gamma_range(g, vi, u);
            ++batch.pairs_checked;
            batch.negatives[c].push_back(u);
            batch.gamma[c].push_back(g);
        }
    }
}

}  // namespace

ContrastBatch sample_batch(const Graph& graph, Rng& rng, const TgclConfig& cfg) {
    cfg.validate();
    if (graph.labels.empty() || graph.train_mask.empty()) {
        throw std::invalid_argument("sample_batch: graph has no labels or train mask");
    }
    ContrastBatch batch;
    for (int cls = 0; cls < graph.num_classes; ++cls) {
        std::vector<int> pool;
        for (int v = 0; v < graph.num_nodes; ++v) {
            if (graph.train_mask[std::size_t(v)] && graph.labels[std::size_t(v)] == cls) {
                pool.push_back(v);
            }
        }
        if (pool.empty()) {
            ++batch.skipped_empty_classes;
            continue;
        }
        const int m = std::min<int>(cfg.per_class_centrals, int(pool.size()));
        std::vector<int> picks = rng.sample_without_replacement(int(pool.size()), m);
        std::sort(picks.begin(), picks.end());
        for (int idx : picks) {
            const int v = pool[std::size_t(idx)];
            const auto nb = graph.neighbors(v);
            if (nb.empty()) {
                ++batch.dropped_isolated_centrals;
                continue;
            }
            std::vector<int> pos;
            if (int(nb.size()) <= cfg.positives_per_central) {
                pos.assign(nb.begin(), nb.end());
            } else {
                std::vector<int> sel =
                    rng.sample_without_replacement(int(nb.size()), cfg.positives_per_central);
                std::sort(sel.begin(), sel.end());
                for (int s : sel) pos.push_back(nb[std::size_t(s)]);
            }
            batch.centrals.push_back(v);
            batch.positives.push_back(std::move(pos));
        }
    }
    finalize_weights(graph, batch);
    return batch;
}

ContrastBatch full_batch(const Graph& graph) {
    ContrastBatch batch;
    for (int v = 0; v < graph.num_nodes; ++v) {
        const auto nb = graph.neighbors(v);
        if (nb.empty()) continue;
        batch.centrals.push_back(v);
        batch.positives.emplace_back(nb.begin(), nb.end());
    }
    // the member set is every node, so negatives become the full complement
    batch.negatives.resize(batch.centrals.size());
    batch.sigma.resize(batch.centrals.size());
    batch.gamma.resize(batch.centrals.size());
    for (std::size_t c = 0; c < batch.centrals.size(); ++c) {
        const int vi = batch.centrals[c];
        for (int vj : batch.positives[c]) {
            const double s = sigma_weight(graph, vi, vj);
            ++batch.pairs_checked;
            batch.sigma[c].push_back(s);
        }
        for (int u = 0; u < graph.num_nodes; ++u) {
            if (u == vi || graph.adjacent(vi, u)) continue;
            batch.negatives[c].push_back(u);
            batch.gamma[c].push_back(gamma_weight(graph, vi, u));
            ++batch.pairs_checked;
        }
    }
    return batch;
}

namespace {

inline double vec_norm(const double* a, int k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += a[j] * a[j];
    return std::sqrt(s);
}

inline double row_cosine(const double* a, const double* b, int k) {
    const double na = vec_norm(a, k);
    const double nb = vec_norm(b, k);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    for (int j = 0; j < k; ++j) dot += a[j] * b[j];
    return dot / (na * nb);
}

// d(cos(a,b))/da and /db scaled by coeff, accumulated in place
inline void cosine_grad(const double* a, const double* b, int k, double coeff, double* ga,
                        double* gb) {
    const double na = vec_norm(a, k);
    const double nb = vec_norm(b, k);
    if (na == 0.0 || nb == 0.0) return;
    double dot = 0.0;
    for (int j = 0; j < k; ++j) dot += a[j] * b[j];
    const double c = dot / (na * nb);
    const double inv_ab = 1.0 / (na * nb);
    const double ca = c / (na * na);
    const double cb = c / (nb * nb);
    for (int j = 0; j < k; ++j) {
        ga[j] += coeff * (b[j] * inv_ab - ca * a[j]);
        gb[j] += coeff * (a[j] * inv_ab - cb * b[j]);
    }
}

}  // namespace

TgclResult tgcl_loss(const DenseMatrix& z, const ContrastBatch& batch, double tau, bool want_grad) {
    if (tau <= 0.0) throw std::invalid_argument("tgcl_loss: tau must be > 0");
    TgclResult res;
    if (want_grad) res.dz = DenseMatrix(z.rows, z.cols);
    if (batch.centrals.empty()) return res;

    const int k = z.cols;
    const double n_centrals = double(batch.centrals.size());
    double loss = 0.0;

    for (std::size_t c = 0; c < batch.centrals.size(); ++c) {
        const int vi = batch.centrals[c];
        const auto& pos = batch.positives[c];
        const auto& neg = batch.negatives[c];
        if (pos.empty()) throw std::invalid_argument("tgcl_loss: central without positives");
        const double* zi = z.row(vi);

        // negative side of the denominator, shared by all positives of vi
        std::vector<double> f_neg(neg.size());
        double neg_sum = 0.0;
        for (std::size_t t = 0; t < neg.size(); ++t) {
            f_neg[t] = std::exp(row_cosine(zi, z.row(neg[t]), k) / tau);
            neg_sum += batch.gamma[c][t] * f_neg[t];
        }

        const double pair_scale = 1.0 / (n_centrals * double(pos.size()));
        for (std::size_t t = 0; t < pos.size(); ++t) {
            const int vj = pos[t];
            const double sigma = batch.sigma[c][t];
            const double f_pos = std::exp(row_cosine(zi, z.row(vj), k) / tau);
            const double denom = sigma * f_pos + neg_sum;
            loss += pair_scale * -std::log(sigma * f_pos / denom);
            if (!want_grad) continue;

            // d(term)/d f_pos = sigma/denom - 1/f_pos, chained through
            // f = exp(cos/tau)
            const double df_pos = pair_scale * (sigma / denom - 1.0 / f_pos);
            cosine_grad(zi, z.row(vj), k, df_pos * f_pos / tau, res.dz.row(vi), res.dz.row(vj));
            for (std::size_t u = 0; u < neg.size(); ++u) {
                const double df_neg = pair_scale * batch.gamma[c][u] / denom;
                cosine_grad(zi, z.row(neg[u]), k, df_neg * f_neg[u] / tau, res.dz.row(vi),
                            res.dz.row(neg[u]));
            }
        }
    }
    res.loss = loss;
    return res;
}

double tgcl_loss_bruteforce(const Graph& graph, const DenseMatrix& z, double tau) {
    if (graph.num_nodes > 2000) {
        throw std::invalid_argument("tgcl_loss_bruteforce: graph exceeds the n <= 2000 guard");
    }
    if (tau <= 0.0) throw std::invalid_argument("tgcl_loss_bruteforce: tau must be > 0");
    const int n = graph.num_nodes;
    const int k = z.cols;

    int eligible = 0;
    for (int v = 0; v < n; ++v) eligible += graph.degree(v) > 0 ? 1 : 0;
    if (eligible == 0) return 0.0;

    double loss = 0.0;
    for (int vi = 0; vi < n; ++vi) {
        const auto nb = graph.neighbors(vi);
        if (nb.empty()) continue;
        const double* zi = z.row(vi);

        double neg_sum = 0.0;
        for (int u = 0; u < n; ++u) {
            if (u == vi || graph.adjacent(vi, u)) continue;
            neg_sum += gamma_weight(graph, vi, u) * std::exp(row_cosine(zi, z.row(u), k) / tau);
        }

        const double pair_scale = 1.0 / (double(eligible) * double(nb.size()));
        for (int vj : nb) {
            const double sigma = sigma_weight(graph, vi, vj);
            const double f_pos = std::exp(row_cosine(zi, z.row(vj), k) / tau);
            loss += pair_scale * -std::log(sigma * f_pos / (sigma * f_pos + neg_sum));
        }
    }
    return loss;
}

PairnormGap pairnorm_special_case(std::span<const double> zi, std::span<const double> zj,
                                  std::span<const double> zk) {
    if (zi.size() != zj.size() || zi.size() != zk.size()) {
        throw std::invalid_argument("pairnorm_special_case: dimension mismatch");
    }
    double dj = 0.0, dk = 0.0;
    for (std::size_t t = 0; t < zi.size(); ++t) {
        dj += (zi[t] - zj[t]) * (zi[t] - zj[t]);
        dk += (zi[t] - zk[t]) * (zi[t] - zk[t]);
    }
    PairnormGap g;
    g.approx = dj - dk;
    const double x = std::exp(g.approx);
    g.exact = std::log1p(x);
    g.gap_bound = 1.0 / x;
    return g;
}

double mi_bound_diagnostic(const Graph& graph, double loss) {
    const int n = graph.num_nodes;
    double acc = 0.0;
    int counted = 0;
    for (int v = 0; v < n; ++v) {
        const int complement = n - 1 - graph.degree(v);
        if (complement < 1) continue;  // nodes adjacent to everything are excluded
        acc += std::log(double(complement));
        ++counted;
    }
    if (counted == 0) {
        throw std::invalid_argument("mi_bound_diagnostic: every node has an empty complement");
    }
    return -loss + acc / double(counted);
}

}  // namespace deepgraph
