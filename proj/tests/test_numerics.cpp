#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <functional>
#include <vector>

#include "deepgraph/gradcheck.hpp"
#include "deepgraph/graph.hpp"
#include "deepgraph/matrix.hpp"
#include "deepgraph/ops.hpp"
#include "deepgraph/optim.hpp"
#include "deepgraph/rng.hpp"

using namespace deepgraph;

namespace {

DenseMatrix make(int r, int c, std::initializer_list<double> vals) {
    DenseMatrix m(r, c);
    std::copy(vals.begin(), vals.end(), m.data.begin());
    return m;
}

DenseMatrix random_matrix(int r, int c, Rng& rng) {
    DenseMatrix m(r, c);
    for (double& v : m.data) v = rng.normal();
    return m;
}

Graph random_graph(int n, double p, Rng& rng) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    return Graph::from_edges(n, std::move(edges));
}

DenseMatrix densify(const NormalizedAdjacency& a) {
    DenseMatrix m(a.n, a.n);
    for (int i = 0; i < a.n; ++i) {
        for (int p = a.row_ptr[std::size_t(i)]; p < a.row_ptr[std::size_t(i) + 1]; ++p) {
            m(i, a.col_idx[std::size_t(p)]) = a.values[std::size_t(p)];
        }
    }
    return m;
}

}  // namespace

TEST_CASE("matmul basics") {
    const DenseMatrix id2 = make(2, 2, {1, 0, 0, 1});
    const DenseMatrix m = make(2, 2, {3, -1, 2, 5});
    CHECK(max_abs_diff(matmul(id2, m), m) == 0.0);

    const DenseMatrix a = make(2, 2, {1, 2, 3, 4});
    const DenseMatrix b = make(2, 1, {0, 1});
    const DenseMatrix c = matmul(a, b);
    CHECK(c(0, 0) == 2.0);
    CHECK(c(1, 0) == 4.0);

    const DenseMatrix z(2, 2);
    CHECK(sum_squares(matmul(z, m)) == 0.0);

    CHECK_THROWS_AS(matmul(make(2, 3, {1, 2, 3, 4, 5, 6}), m), std::invalid_argument);
}

TEST_CASE("matmul transposed variants agree with the plain product") {
    Rng rng(5);
    const DenseMatrix a = random_matrix(7, 4, rng);
    const DenseMatrix b = random_matrix(7, 3, rng);
    // a^T * b via explicit transpose
    DenseMatrix at(4, 7);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 4; ++j) at(j, i) = a(i, j);
    }
    CHECK(max_abs_diff(matmul_tn(a, b), matmul(at, b)) < 1e-13);

    const DenseMatrix c = random_matrix(5, 4, rng);
    DenseMatrix ct(4, 5);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 4; ++j) ct(j, i) = c(i, j);
    }
    CHECK(max_abs_diff(matmul_nt(a, c), matmul(a, ct)) < 1e-13);
}

TEST_CASE("spmm: isolated nodes give the identity operator") {
    Graph g = Graph::from_edges(3, {});
    NormalizedAdjacency a = normalize(g);
    Rng rng(1);
    const DenseMatrix h = random_matrix(3, 4, rng);
    CHECK(max_abs_diff(spmm(a, h), h) == 0.0);
}

TEST_CASE("spmm: K2 rows become the mean of the input rows") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    NormalizedAdjacency a = normalize(g);
    const DenseMatrix h = make(2, 2, {2, 4, 6, 8});
    const DenseMatrix out = spmm(a, h);
    CHECK(out(0, 0) == doctest::Approx(4.0));
    CHECK(out(0, 1) == doctest::Approx(6.0));
    CHECK(out(1, 0) == doctest::Approx(4.0));
    CHECK(out(1, 1) == doctest::Approx(6.0));
}

TEST_CASE("spmm equals the dense product on random graphs") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + rng.uniform_int(64);
        Graph g = random_graph(n, 0.2, rng);
        NormalizedAdjacency a = normalize(g);
        const DenseMatrix h = random_matrix(n, 5, rng);
        CHECK(max_abs_diff(spmm(a, h), matmul(densify(a), h)) < 1e-12);
    }
}

TEST_CASE("sparse feature product matches the dense path") {
    Rng rng(13);
    DenseMatrix x = random_matrix(20, 15, rng);
    // sparsify: zero out most entries
    for (double& v : x.data) {
        if (rng.uniform() < 0.7) v = 0.0;
    }
    const SparseMatrix xs = SparseMatrix::from_dense(x);
    const DenseMatrix w = random_matrix(15, 6, rng);
    CHECK(max_abs_diff(sparse_matmul(xs, w), matmul(x, w)) < 1e-13);

    // gradient side: dw += x^T dq
    const DenseMatrix dq = random_matrix(20, 6, rng);
    DenseMatrix dw(15, 6);
    sparse_matmul_grad_w(xs, dq, dw);
    CHECK(max_abs_diff(dw, matmul_tn(x, dq)) < 1e-13);
}

TEST_CASE("relu forward and backward") {
    const DenseMatrix x = make(1, 3, {-1, 0, 2});
    const DenseMatrix y = relu(x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 0.0);
    CHECK(y(0, 2) == 2.0);
    const DenseMatrix dy = make(1, 3, {1, 1, 1});
    const DenseMatrix dx = relu_backward(dy, y);
    CHECK(dx(0, 0) == 0.0);
    CHECK(dx(0, 1) == 0.0);
    CHECK(dx(0, 2) == 1.0);
}

TEST_CASE("relu gradient matches central differences") {
    Rng rng(17);
    DenseMatrix x = random_matrix(4, 5, rng);
    // keep entries away from the kink
    for (double& v : x.data) {
        if (std::fabs(v) < 0.05) v += 0.1;
    }
    // scalar head: sum of relu, perturbed per coordinate
    const double eps = 1e-6;
    const DenseMatrix y = relu(x);
    DenseMatrix ones(4, 5);
    for (double& v : ones.data) v = 1.0;
    const DenseMatrix dx = relu_backward(ones, y);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x.data[i];
        x.data[i] = saved + eps;
        double fp = 0.0;
        for (double v : relu(x).data) fp += v;
        x.data[i] = saved - eps;
        double fm = 0.0;
        for (double v : relu(x).data) fm += v;
        x.data[i] = saved;
        CHECK(std::fabs((fp - fm) / (2 * eps) - dx.data[i]) < 1e-6);
    }
}

TEST_CASE("dropout: rate 0 and eval mode are the identity") {
    Rng rng(2);
    const DenseMatrix x = random_matrix(3, 3, rng);
    CHECK(max_abs_diff(dropout(x, 0.0, rng, true), x) == 0.0);
    CHECK(max_abs_diff(dropout(x, 0.9, rng, false), x) == 0.0);
}

TEST_CASE("dropout keeps about the right fraction and scales survivors") {
    Rng rng(23);
    DenseMatrix x(1000, 1000);
    for (double& v : x.data) v = 1.0;
    std::vector<std::uint8_t> mask;
    const DenseMatrix y = dropout(x, 0.5, rng, true, &mask);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask[i]) {
            ++kept;
            CHECK(y.data[i] == 2.0);
        } else {
            CHECK(y.data[i] == 0.0);
        }
    }
    const double frac = double(kept) / double(y.size());
    CHECK(frac > 0.49);
    CHECK(frac < 0.51);
}

TEST_CASE("softmax cross entropy: analytic values") {
    // uniform logits over c classes -> ln(c)
    DenseMatrix logits(2, 5);
    std::vector<int> labels = {3, 1};
    std::vector<std::uint8_t> mask = {1, 1};
    auto res = softmax_cross_entropy(logits, labels, mask);
    CHECK(res.loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));

    // a huge correct logit drives the loss to 0
    DenseMatrix peaked(1, 4);
    peaked(0, 2) = 200.0;
    auto res2 = softmax_cross_entropy(peaked, {2}, {1});
    CHECK(res2.loss < 1e-12);

    CHECK_THROWS_WITH_AS(softmax_cross_entropy(logits, labels, {0, 0}), "empty supervision mask",
                         std::invalid_argument);
}

TEST_CASE("softmax cross entropy gradient matches central differences") {
    Rng rng(31);
    DenseMatrix logits = random_matrix(6, 4, rng);
    std::vector<int> labels(6);
    for (int& y : labels) y = rng.uniform_int(4);
    std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0, 1};
    const auto base = softmax_cross_entropy(logits, labels, mask);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double saved = logits.data[i];
        logits.data[i] = saved + eps;
        const double fp = softmax_cross_entropy(logits, labels, mask).loss;
        logits.data[i] = saved - eps;
        const double fm = softmax_cross_entropy(logits, labels, mask).loss;
        logits.data[i] = saved;
        const double numeric = (fp - fm) / (2 * eps);
        const double denom = std::max({std::fabs(numeric), std::fabs(base.dlogits.data[i]), 1e-8});
        CHECK(std::fabs(numeric - base.dlogits.data[i]) / denom < 1e-6);
    }
    // unmasked rows receive no gradient
    for (int j = 0; j < 4; ++j) {
        CHECK(base.dlogits(1, j) == 0.0);
        CHECK(base.dlogits(4, j) == 0.0);
    }
}

TEST_CASE("rmsprop step") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Parameter p("w", make(1, 2, {1.5, -2.5}));
        RmsProp opt;
        std::vector<Parameter*> ps = {&p};
        opt.step(ps, 0.1);
        CHECK(p.value(0, 0) == 1.5);
        CHECK(p.value(0, 1) == -2.5);
    }
    SUBCASE("first step matches the closed form") {
        const double g = 0.7, lr = 0.01, decay = 0.9, eps = 1e-8;
        Parameter p("w", make(1, 1, {2.0}));
        p.grad(0, 0) = g;
        RmsProp opt(decay, eps);
        std::vector<Parameter*> ps = {&p};
        opt.step(ps, lr);
        const double expected = 2.0 - lr * g / (std::sqrt((1 - decay) * g * g) + eps);
        CHECK(p.value(0, 0) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(p.grad(0, 0) == 0.0);  // gradients cleared after the step
    }
    SUBCASE("repeated identical gradients shrink the update") {
        Parameter p("w", make(1, 1, {0.0}));
        RmsProp opt;
        std::vector<Parameter*> ps = {&p};
        p.grad(0, 0) = 1.0;
        opt.step(ps, 0.1);
        const double first = std::fabs(p.value(0, 0));
        const double before = p.value(0, 0);
        p.grad(0, 0) = 1.0;
        opt.step(ps, 0.1);
        const double second = std::fabs(p.value(0, 0) - before);
        CHECK(second < first);
    }
    SUBCASE("with decay near 1 and a dominating epsilon it reduces to scaled gradient descent") {
        const double eps = 1e3, lr = 0.5;
        Parameter p("w", make(1, 1, {1.0}));
        p.grad(0, 0) = 2.0;
        RmsProp opt(0.999999, eps);
        std::vector<Parameter*> ps = {&p};
        opt.step(ps, lr);
        CHECK(p.value(0, 0) == doctest::Approx(1.0 - lr / eps * 2.0).epsilon(1e-6));
    }
}

TEST_CASE("finite_difference_check: quadratic loss is exact") {
    Rng rng(41);
    Parameter w("w", random_matrix(5, 5, rng));
    auto loss = [&]() { return 0.5 * sum_squares(w.value); };
    w.grad = w.value;  // analytic gradient of 0.5*||W||^2
    std::vector<Parameter*> ps = {&w};
    Rng coords(1);
    const auto rep = finite_difference_check(loss, ps, 1e-6, 200, coords);
    CHECK(rep.max_relative_error < 1e-9);
    CHECK(rep.coords_checked >= 25);
}

TEST_CASE("finite_difference_check flags a corrupted gradient") {
    Rng rng(43);
    Parameter w("w", random_matrix(4, 4, rng));
    auto loss = [&]() { return 0.5 * sum_squares(w.value); };
    w.grad = w.value;
    for (double& g : w.grad.data) g *= 1.1;  // +10% fault injection
    std::vector<Parameter*> ps = {&w};
    Rng coords(2);
    const auto rep = finite_difference_check(loss, ps, 1e-6, 16, coords);
    CHECK(rep.max_relative_error > 0.05);
    CHECK(rep.max_relative_error < 0.15);
}
