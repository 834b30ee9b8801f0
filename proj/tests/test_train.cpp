#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "deepgraph/datasets.hpp"
#include "deepgraph/train.hpp"

using namespace deepgraph;

namespace {

Graph tiny_dataset() {
    Graph g = two_circles(60, 0.02, 0.3, 4);
    random_split(g, 0.2, 0.2, 4);
    return g;
}

TrainConfig tiny_config(Variant v, int depth, int iters) {
    TrainConfig cfg;
    cfg.model.variant = v;
    cfg.model.depth = depth;
    cfg.model.hidden_dim = 8;
    cfg.model.lambda = 10.0;
    cfg.model.dropout_rate = 0.3;
    cfg.tgcl.alpha = 0.0;
    cfg.iterations = iters;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST_CASE("train: zero iterations returns initial-parameter metrics") {
    const Graph g = tiny_dataset();
    const RunRecord rec = train(g, tiny_config(Variant::vanilla, 2, 0));
    CHECK(rec.train_loss.empty());
    CHECK(rec.test_acc >= 0.0);
    CHECK(rec.test_acc <= 1.0);
    CHECK_FALSE(rec.diverged);
}

TEST_CASE("train: reruns with the same seed are identical") {
    const Graph g = tiny_dataset();
    TrainConfig cfg = tiny_config(Variant::wdg, 4, 30);
    cfg.tgcl.alpha = 0.05;
    cfg.tgcl.per_class_centrals = 4;
    cfg.tgcl.positives_per_central = 3;
    const RunRecord a = train(g, cfg);
    const RunRecord b = train(g, cfg);
    CHECK(a.train_loss == b.train_loss);
    CHECK(a.val_acc == b.val_acc);
    CHECK(a.test_acc == b.test_acc);
    CHECK(a.best_iteration == b.best_iteration);
    CHECK(a.tgcl_pairs_checked == b.tgcl_pairs_checked);
    CHECK(a.tgcl_pairs_checked > 0);
}

TEST_CASE("train: the reported test accuracy comes from the best-validation snapshot") {
    const Graph g = tiny_dataset();
    const RunRecord rec = train(g, tiny_config(Variant::resnet, 3, 40));
    REQUIRE(rec.best_iteration >= 0);
    CHECK(rec.best_val_acc == doctest::Approx(rec.val_acc[std::size_t(rec.best_iteration)]));
    for (double v : rec.val_acc) CHECK(v <= rec.best_val_acc + 1e-12);
}

TEST_CASE("train: layer weight snapshot obeys the variant rules") {
    const Graph g = tiny_dataset();
    TrainConfig cfg = tiny_config(Variant::wdg_s, 6, 5);
    cfg.model.lambda = 12.0;
    const RunRecord rec = train(g, cfg);
    REQUIRE(rec.layer_weights.size() == 4);  // layers 3..6
    for (auto [l, w] : rec.layer_weights) CHECK(w == decay_factor(l, 12.0));
}

TEST_CASE("sweep: single value equals one train call, alpha 0 equals the baseline") {
    const Graph g = tiny_dataset();
    TrainConfig cfg = tiny_config(Variant::wdg, 4, 20);
    cfg.tgcl.alpha = 0.05;

    const auto rows = sweep(g, cfg, SweepParam::alpha, {0.0, 0.05});
    REQUIRE(rows.size() == 2);

    TrainConfig base = cfg;
    base.tgcl.alpha = 0.0;
    const RunRecord baseline = train(g, base);
    CHECK(rows[0].test_acc == baseline.test_acc);
    CHECK(rows[0].best_val_acc == baseline.best_val_acc);

    TrainConfig direct = cfg;
    direct.tgcl.alpha = 0.05;
    const RunRecord one = train(g, direct);
    CHECK(rows[1].test_acc == one.test_acc);
}

TEST_CASE("stats report") {
    Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    const auto r = compute_stats(g);
    CHECK(r.num_nodes == 4);
    CHECK(r.num_edges == 3);
    CHECK(r.components == 1);
    CHECK(r.diameter == 3);
    CHECK(r.lambda_lo == 1);
    CHECK(r.lambda_hi == 8);
}

TEST_CASE("gradcheck harness rejects big graphs and catches corruption") {
    TrainConfig cfg = tiny_config(Variant::vanilla, 2, 0);
    const Graph big = erdos_renyi_classification(60, 0.1, 1, 4, 2);
    CHECK_THROWS_AS(gradcheck_harness(big, cfg), std::invalid_argument);

    const Graph g = erdos_renyi_classification(20, 0.2, 1, 4, 2);
    const auto clean = gradcheck_harness(g, cfg, 1e-6, 100);
    CHECK(clean.passed);
    const auto corrupted = gradcheck_harness(g, cfg, 1e-6, 100, 0);
    CHECK_FALSE(corrupted.passed);
    CHECK(corrupted.fd.max_relative_error > 0.05);
}

TEST_CASE("missing feature study covers the grid and finds the best depth") {
    Graph g = two_circles(50, 0.02, 0.3, 8);
    random_split(g, 0.2, 0.2, 8);
    TrainConfig cfg = tiny_config(Variant::vanilla, 2, 10);
    const auto study = missing_feature_study(g, cfg, {0.0, 50.0}, {2, 3});
    CHECK(study.cells.size() == 4);
    REQUIRE(study.best_per_rate.size() == 2);
    for (const auto& [rate, depth, acc] : study.best_per_rate) {
        CHECK((depth == 2 || depth == 3));
        CHECK(acc >= 0.0);
    }
    // the rate-0 cells must match unmasked training exactly
    TrainConfig base = cfg;
    base.model.depth = 2;
    const RunRecord direct = train(g, base);
    CHECK(study.cells[0].test_acc == direct.test_acc);
}

TEST_CASE("training diverges cleanly on an exploding configuration") {
    Graph g = tiny_dataset();
    TrainConfig cfg = tiny_config(Variant::resnet, 8, 60);
    cfg.lr = 1e200;  // one step overflows the parameters
    const RunRecord rec = train(g, cfg);
    CHECK(rec.diverged);
    CHECK(rec.divergence_iteration >= 1);
    CHECK(int(rec.train_loss.size()) == rec.divergence_iteration);
}
