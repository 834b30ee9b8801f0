#include "deepgraph/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#ifdef DEEPGRAPH_USE_CBLAS
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deepgraph {

namespace {

int g_threads = 0;  // 0 = uninitialized

int detect_threads() {
    if (const char* env = std::getenv("DEEPGRAPH_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void apply_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
#ifdef DEEPGRAPH_USE_CBLAS
    // the product shapes here are too small for BLAS-internal threading to
    // pay for its synchronization; parallelism lives in the row-parallel
    // kernels and in independent training runs
    openblas_set_num_threads(1);
    (void)n;
#endif
}

int ensure_threads() {
    if (g_threads == 0) {
        g_threads = detect_threads();
        apply_threads(g_threads);
    }
    return g_threads;
}

}  // namespace

void set_num_threads(int n) {
    g_threads = n > 0 ? n : detect_threads();
    apply_threads(g_threads);
}

int num_threads() { return ensure_threads(); }

void shape_error(const std::string& op, const DenseMatrix& a, const DenseMatrix& b) {
    throw std::invalid_argument(op + ": incompatible shapes " + std::to_string(a.rows) + "x" +
                                std::to_string(a.cols) + " and " + std::to_string(b.rows) + "x" +
                                std::to_string(b.cols));
}

#ifdef DEEPGRAPH_USE_CBLAS

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) shape_error("matmul", a, b);
    ensure_threads();
    if (a.rows == 0 || b.cols == 0) return DenseMatrix(a.rows, b.cols);
    if (a.cols == 0) return DenseMatrix(a.rows, b.cols);
    DenseMatrix c = DenseMatrix::uninitialized(a.rows, b.cols);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows) shape_error("matmul_tn", a, b);
    ensure_threads();
    if (a.cols == 0 || b.cols == 0 || a.rows == 0) return DenseMatrix(a.cols, b.cols);
    DenseMatrix c = DenseMatrix::uninitialized(a.cols, b.cols);
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, a.cols, b.cols, a.rows, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.cols) shape_error("matmul_nt", a, b);
    ensure_threads();
    if (a.rows == 0 || b.rows == 0 || a.cols == 0) return DenseMatrix(a.rows, b.rows);
    DenseMatrix c = DenseMatrix::uninitialized(a.rows, b.rows);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, a.rows, b.rows, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

#else

// Portable fallback kernels. Row-parallel so results do not depend on the
// thread count.

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) shape_error("matmul", a, b);
    ensure_threads();
    DenseMatrix c(a.rows, b.cols);
    const int m = a.rows, k = a.cols, n = b.cols;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.row(p);
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows) shape_error("matmul_tn", a, b);
    ensure_threads();
    DenseMatrix c(a.cols, b.cols);
    const int m = a.cols, k = a.rows, n = b.cols;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < m; ++i) {
        double* crow = c.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = a(p, i);
            if (av == 0.0) continue;
            const double* brow = b.row(p);
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.cols) shape_error("matmul_nt", a, b);
    ensure_threads();
    DenseMatrix c(a.rows, b.rows);
    const int m = a.rows, k = a.cols, n = b.rows;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (int j = 0; j < n; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
    return c;
}

#endif  // DEEPGRAPH_USE_CBLAS

void add_scaled(DenseMatrix& y, const DenseMatrix& x, double alpha) {
    if (!y.same_shape(x)) shape_error("add_scaled", y, x);
    const std::size_t n = y.size();
    double* yp = y.data.data();
    const double* xp = x.data.data();
    for (std::size_t i = 0; i < n; ++i) yp[i] += alpha * xp[i];
}

double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) shape_error("frobenius_dot", a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

double sum_squares(const DenseMatrix& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v * v;
    return acc;
}

bool all_finite(const DenseMatrix& a) {
    for (double v : a.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) shape_error("max_abs_diff", a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace deepgraph
