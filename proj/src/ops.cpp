#include "deepgraph/ops.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deepgraph {

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m, double zero_tol) {
    SparseMatrix s;
    s.rows = m.rows;
    s.cols = m.cols;
    s.row_ptr.assign(std::size_t(m.rows) + 1, 0);
    for (int i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        for (int j = 0; j < m.cols; ++j) {
            if (std::fabs(r[j]) > zero_tol) {
                s.col_idx.push_back(j);
                s.values.push_back(r[j]);
            }
        }
        s.row_ptr[std::size_t(i) + 1] = int(s.col_idx.size());
    }
    return s;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int p = row_ptr[std::size_t(i)]; p < row_ptr[std::size_t(i) + 1]; ++p) {
            m(i, col_idx[std::size_t(p)]) = values[std::size_t(p)];
        }
    }
    return m;
}

DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h) {
    if (adj.n != h.rows) {
        throw std::invalid_argument("spmm: adjacency is " + std::to_string(adj.n) + "x" +
                                    std::to_string(adj.n) + " but h has " + std::to_string(h.rows) +
                                    " rows");
    }
    DenseMatrix out = DenseMatrix::uninitialized(h.rows, h.cols);
    const int n = adj.n, k = h.cols;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (num_threads() > 1 && std::size_t(n) * k > 16384)
#endif
    for (int i = 0; i < n; ++i) {
        double* orow = out.row(i);
        std::fill(orow, orow + k, 0.0);
        for (int p = adj.row_ptr[std::size_t(i)]; p < adj.row_ptr[std::size_t(i) + 1]; ++p) {
            const double v = adj.values[std::size_t(p)];
            const double* hrow = h.row(adj.col_idx[std::size_t(p)]);
            for (int j = 0; j < k; ++j) orow[j] += v * hrow[j];
        }
    }
    return out;
}

DenseMatrix sparse_matmul(const SparseMatrix& x, const DenseMatrix& w) {
    if (x.cols != w.rows) {
        throw std::invalid_argument("sparse_matmul: x has " + std::to_string(x.cols) +
                                    " cols but w has " + std::to_string(w.rows) + " rows");
    }
    DenseMatrix out = DenseMatrix::uninitialized(x.rows, w.cols);
    const int n = x.rows, k = w.cols;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (num_threads() > 1 && x.nnz() * std::size_t(k) > 65536)
#endif
    for (int i = 0; i < n; ++i) {
        double* orow = out.row(i);
        std::fill(orow, orow + k, 0.0);
        for (int p = x.row_ptr[std::size_t(i)]; p < x.row_ptr[std::size_t(i) + 1]; ++p) {
            const double v = x.values[std::size_t(p)];
            const double* wrow = w.row(x.col_idx[std::size_t(p)]);
            for (int j = 0; j < k; ++j) orow[j] += v * wrow[j];
        }
    }
    return out;
}

void sparse_matmul_grad_w(const SparseMatrix& x, const DenseMatrix& dq, DenseMatrix& dw) {
    if (x.rows != dq.rows || dw.rows != x.cols || dw.cols != dq.cols) {
        throw std::invalid_argument("sparse_matmul_grad_w: incompatible shapes");
    }
    const int k = dq.cols;
    for (int i = 0; i < x.rows; ++i) {
        const double* drow = dq.row(i);
        for (int p = x.row_ptr[std::size_t(i)]; p < x.row_ptr[std::size_t(i) + 1]; ++p) {
            double* wrow = dw.row(x.col_idx[std::size_t(p)]);
            const double v = x.values[std::size_t(p)];
            for (int j = 0; j < k; ++j) wrow[j] += v * drow[j];
        }
    }
}

DenseMatrix relu(const DenseMatrix& x) {
    DenseMatrix y = DenseMatrix::uninitialized(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
    return y;
}

void relu_inplace(DenseMatrix& x) {
    for (double& v : x.data) v = v > 0.0 ? v : 0.0;
}

DenseMatrix relu_backward(const DenseMatrix& dy, const DenseMatrix& y) {
    if (!dy.same_shape(y)) shape_error("relu_backward", dy, y);
    DenseMatrix dx = DenseMatrix::uninitialized(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dy.size(); ++i) dx.data[i] = y.data[i] > 0.0 ? dy.data[i] : 0.0;
    return dx;
}

DenseMatrix dropout(const DenseMatrix& x, double rate, Rng& rng, bool training,
                    std::vector<std::uint8_t>* mask) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
    if (!training || rate == 0.0) {
        if (mask) mask->assign(x.size(), 1);
        return x;
    }
    const double scale = 1.0 / (1.0 - rate);
    // one engine draw keys the whole mask; per-entry bits come from a
    // counter-based mix, which avoids a serial generator dependency per entry
    const std::uint64_t key = rng.next_u64();
    const std::uint64_t cutoff = std::uint64_t(rate * 9007199254740992.0);  // rate * 2^53
    DenseMatrix y = DenseMatrix::uninitialized(x.rows, x.cols);
    if (mask) mask->resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool keep = (mix_seed(key + i) >> 11) >= cutoff;
        y.data[i] = keep ? x.data[i] * scale : 0.0;
        if (mask) (*mask)[i] = keep ? 1 : 0;
    }
    return y;
}

DenseMatrix dropout_backward(const DenseMatrix& dy, double rate,
                             const std::vector<std::uint8_t>& mask) {
    if (mask.size() != dy.size()) throw std::invalid_argument("dropout_backward: bad mask size");
    const double scale = 1.0 / (1.0 - rate);
    DenseMatrix dx = DenseMatrix::uninitialized(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dy.size(); ++i) dx.data[i] = mask[i] ? dy.data[i] * scale : 0.0;
    return dx;
}

SparseMatrix dropout_sparse(const SparseMatrix& x, double rate, Rng& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
    if (!training || rate == 0.0) return x;
    const double scale = 1.0 / (1.0 - rate);
    const std::uint64_t key = rng.next_u64();
    const std::uint64_t cutoff = std::uint64_t(rate * 9007199254740992.0);
    SparseMatrix y;
    y.rows = x.rows;
    y.cols = x.cols;
    y.row_ptr.assign(std::size_t(x.rows) + 1, 0);
    y.col_idx.reserve(x.nnz());
    y.values.reserve(x.nnz());
    for (int i = 0; i < x.rows; ++i) {
        for (int p = x.row_ptr[std::size_t(i)]; p < x.row_ptr[std::size_t(i) + 1]; ++p) {
            if ((mix_seed(key + std::uint64_t(p)) >> 11) >= cutoff) {
                y.col_idx.push_back(x.col_idx[std::size_t(p)]);
                y.values.push_back(x.values[std::size_t(p)] * scale);
            }
        }
        y.row_ptr[std::size_t(i) + 1] = int(y.col_idx.size());
    }
    return y;
}

CrossEntropyResult softmax_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels,
                                         const std::vector<std::uint8_t>& mask) {
    if (int(labels.size()) != logits.rows || mask.size() != labels.size()) {
        throw std::invalid_argument("softmax_cross_entropy: labels/mask size mismatch");
    }
    int count = 0;
    for (std::uint8_t m : mask) count += m ? 1 : 0;
    if (count == 0) throw std::invalid_argument("empty supervision mask");

    CrossEntropyResult res;
    res.dlogits = DenseMatrix(logits.rows, logits.cols);
    const double inv = 1.0 / double(count);
    double loss = 0.0;
    for (int i = 0; i < logits.rows; ++i) {
        if (!mask[std::size_t(i)]) continue;
        const double* r = logits.row(i);
        double mx = r[0];
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, r[j]);
        double z = 0.0;
        for (int j = 0; j < logits.cols; ++j) z += std::exp(r[j] - mx);
        const int y = labels[std::size_t(i)];
        if (y < 0 || y >= logits.cols) throw std::invalid_argument("softmax_cross_entropy: bad label");
        loss += (std::log(z) - (r[y] - mx)) * inv;
        double* g = res.dlogits.row(i);
        for (int j = 0; j < logits.cols; ++j) g[j] = std::exp(r[j] - mx) / z * inv;
        g[y] -= inv;
    }
    res.loss = loss;
    return res;
}

DenseMatrix glorot_uniform(int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    DenseMatrix w(fan_in, fan_out);
    for (double& v : w.data) v = rng.uniform(-limit, limit);
    return w;
}

}  // namespace deepgraph
