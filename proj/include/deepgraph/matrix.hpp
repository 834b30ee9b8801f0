#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace deepgraph {

// Allocator that default-initializes on resize, so buffers that a kernel
// fully overwrites are not memset first.
template <typename T, typename Base = std::allocator<T>>
struct uninit_allocator : Base {
    template <typename U>
    struct rebind {
        using other = uninit_allocator<U, typename std::allocator_traits<Base>::template rebind_alloc<U>>;
    };
    using Base::Base;
    template <typename U>
    void construct(U* p) noexcept(noexcept(::new (static_cast<void*>(p)) U)) {
        ::new (static_cast<void*>(p)) U;
    }
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        std::allocator_traits<Base>::construct(static_cast<Base&>(*this), p,
                                               std::forward<Args>(args)...);
    }
};

// Row-major dense matrix, double precision throughout.
struct DenseMatrix {
    using Storage = std::vector<double, uninit_allocator<double>>;

    int rows = 0;
    int cols = 0;
    Storage data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), data(std::size_t(r) * std::size_t(c), 0.0) {}

    static DenseMatrix zeros(int r, int c) { return DenseMatrix(r, c); }

    // Contents are indeterminate; only for buffers the caller fully writes.
    static DenseMatrix uninitialized(int r, int c) {
        DenseMatrix m;
        m.rows = r;
        m.cols = c;
        m.data.resize(std::size_t(r) * std::size_t(c));
        return m;
    }

    double& operator()(int i, int j) { return data[std::size_t(i) * cols + j]; }
    double operator()(int i, int j) const { return data[std::size_t(i) * cols + j]; }

    double* row(int i) { return data.data() + std::size_t(i) * cols; }
    const double* row(int i) const { return data.data() + std::size_t(i) * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
    void set_zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// Thread cap for internal kernel parallelism. Reads DEEPGRAPH_THREADS once at
// startup unless overridden explicitly.
void set_num_threads(int n);
int num_threads();

// c = a * b. Shape mismatch throws std::invalid_argument.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// c = a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// c = a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

// y += alpha * x
void add_scaled(DenseMatrix& y, const DenseMatrix& x, double alpha);
// sum_ij a_ij * b_ij
double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b);
double sum_squares(const DenseMatrix& a);
bool all_finite(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

[[noreturn]] void shape_error(const std::string& op, const DenseMatrix& a, const DenseMatrix& b);

}  // namespace deepgraph
