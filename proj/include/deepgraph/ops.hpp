#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "deepgraph/graph.hpp"
#include "deepgraph/matrix.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

// General CSR matrix; used for the (mostly sparse) input feature matrix so
// the first layer's products scale with the nonzero count.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    static SparseMatrix from_dense(const DenseMatrix& m, double zero_tol = 0.0);
    DenseMatrix to_dense() const;
    std::size_t nnz() const { return values.size(); }
};

// Dense result of adj * h.
DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h);

// x * w for CSR x and dense w.
DenseMatrix sparse_matmul(const SparseMatrix& x, const DenseMatrix& w);

// dw += x^T * dq, the weight gradient of sparse_matmul.
void sparse_matmul_grad_w(const SparseMatrix& x, const DenseMatrix& dq, DenseMatrix& dw);

// Elementwise max(0, x). The backward pass recovers the active mask from the
// forward output (y > 0 iff the pre-activation was > 0).
DenseMatrix relu(const DenseMatrix& x);
void relu_inplace(DenseMatrix& x);
DenseMatrix relu_backward(const DenseMatrix& dy, const DenseMatrix& y);

// Inverted dropout: in training mode zeroes entries with probability `rate`
// and scales survivors by 1/(1-rate); in eval mode the identity. The survivor
// mask is written to `mask` (one byte per entry) when training.
DenseMatrix dropout(const DenseMatrix& x, double rate, Rng& rng, bool training,
                    std::vector<std::uint8_t>* mask = nullptr);
DenseMatrix dropout_backward(const DenseMatrix& dy, double rate,
                             const std::vector<std::uint8_t>& mask);

// Dropout over the stored entries of a CSR matrix (structural zeros are
// unaffected by dropout, so this is equivalent to the dense version).
SparseMatrix dropout_sparse(const SparseMatrix& x, double rate, Rng& rng, bool training);

struct CrossEntropyResult {
    double loss = 0.0;
    DenseMatrix dlogits;
};

// Mean negative log-likelihood over masked rows; gradient rows are zero
// outside the mask. Throws std::invalid_argument on an empty mask.
CrossEntropyResult softmax_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels,
                                         const std::vector<std::uint8_t>& mask);

// Glorot-uniform initialization.
DenseMatrix glorot_uniform(int fan_in, int fan_out, Rng& rng);

}  // namespace deepgraph
