#include <doctest.h>

#include <stdexcept>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "deepgraph/datasets.hpp"

using namespace deepgraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("deepgraph_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int counter;
};
int TempDir::counter = 0;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("load_citation parses the classic content/cites layout") {
    TempDir dir;
    write_file(dir.file("toy.content"),
               "paper_a 1 0 1 physics\n"
               "paper_b 0 1 1 biology\n");
    write_file(dir.file("toy.cites"),
               "paper_a paper_b\n"
               "paper_a missing_paper\n");
    LoadStats stats;
    Graph g = load_citation(dir.file("toy.content"), dir.file("toy.cites"), &stats);
    g.check_invariants();
    CHECK(g.num_nodes == 2);
    CHECK(g.features.cols == 3);
    CHECK(g.num_classes == 2);
    CHECK(g.labels[0] == 0);  // first-occurrence class ids
    CHECK(g.labels[1] == 1);
    CHECK(g.adjacent(0, 1));
    CHECK(stats.dropped_unknown_refs == 1);
    CHECK(g.features(0, 0) == 1.0);
    CHECK(g.features(1, 0) == 0.0);
}

TEST_CASE("load_citation error paths carry line numbers") {
    TempDir dir;
    SUBCASE("malformed row") {
        write_file(dir.file("bad.content"), "only_one_token\n");
        write_file(dir.file("bad.cites"), "");
        CHECK_THROWS_WITH_AS(load_citation(dir.file("bad.content"), dir.file("bad.cites")),
                             doctest::Contains("bad.content:1"), std::runtime_error);
    }
    SUBCASE("inconsistent attribute count") {
        write_file(dir.file("bad.content"),
                   "a 1 0 classx\n"
                   "b 1 0 1 classy\n");
        write_file(dir.file("bad.cites"), "");
        CHECK_THROWS_WITH_AS(load_citation(dir.file("bad.content"), dir.file("bad.cites")),
                             doctest::Contains("inconsistent attribute count"), std::runtime_error);
    }
}

TEST_CASE("canonical format round-trips bitwise") {
    Graph g = two_circles(40, 0.05, 0.35, 9);
    random_split(g, 0.1, 0.2, 3);

    TempDir dir;
    save_canonical(g, dir.file("a.graph"));
    Graph loaded = load_canonical(dir.file("a.graph"));
    loaded.check_invariants();
    CHECK(loaded.num_nodes == g.num_nodes);
    CHECK(loaded.num_classes == g.num_classes);
    CHECK(loaded.col_idx == g.col_idx);
    CHECK(loaded.labels == g.labels);
    CHECK(loaded.train_mask == g.train_mask);
    CHECK(max_abs_diff(loaded.features, g.features) == 0.0);

    save_canonical(loaded, dir.file("b.graph"));
    CHECK(slurp(dir.file("a.graph")) == slurp(dir.file("b.graph")));
}

TEST_CASE("canonical loader reports duplicate edges and rejects bad headers") {
    TempDir dir;
    SUBCASE("duplicate edge is dropped with a count") {
        write_file(dir.file("dup.graph"),
                   "#graph v1\n"
                   "n 3 d 1 c 1\n"
                   "E\n0 1\n0 1\nX\n0\n0\n0\nY\n0\n0\n0\nM\nnone\nnone\nnone\n");
        LoadStats stats;
        Graph g = load_canonical(dir.file("dup.graph"), &stats);
        CHECK(g.num_edges() == 1);
        CHECK(stats.dropped_duplicate_edges == 1);
    }
    SUBCASE("empty edge section loads") {
        write_file(dir.file("empty.graph"),
                   "#graph v1\nn 2 d 1 c 1\nE\nX\n0.5\n1.5\nY\n0\n0\nM\nnone\nnone\n");
        Graph g = load_canonical(dir.file("empty.graph"));
        CHECK(g.num_edges() == 0);
        CHECK(g.features(1, 0) == 1.5);
    }
    SUBCASE("missing header") {
        write_file(dir.file("bad.graph"), "n 2 d 1 c 1\n");
        CHECK_THROWS_AS(load_canonical(dir.file("bad.graph")), std::runtime_error);
    }
}

TEST_CASE("two circles geometry") {
    SUBCASE("no cross-circle edges below the ring gap") {
        Graph g = two_circles(200, 0.0, 0.2, 1);
        for (int i = 0; i < g.num_nodes; ++i) {
            for (int j : g.neighbors(i)) {
                CHECK(g.labels[std::size_t(i)] == g.labels[std::size_t(j)]);
            }
        }
    }
    SUBCASE("each node reaches at least two ring neighbors at n = 1000") {
        // outer arc spacing 2*pi/500 ~ 0.0126, inner half of that; 0.03
        // therefore links every node to its immediate ring neighbors
        Graph g = two_circles(1000, 0.0, 0.03, 1);
        for (int i = 0; i < g.num_nodes; ++i) CHECK(g.degree(i) >= 2);
    }
    SUBCASE("deterministic per seed") {
        Graph a = two_circles(300, 0.01, 0.1, 42);
        Graph b = two_circles(300, 0.01, 0.1, 42);
        CHECK(a.col_idx == b.col_idx);
        CHECK(max_abs_diff(a.features, b.features) == 0.0);
        Graph c = two_circles(300, 0.01, 0.1, 43);
        CHECK(a.col_idx != c.col_idx);
    }
}

TEST_CASE("random split") {
    Graph g = two_circles(100, 0.0, 0.05, 1);
    random_split(g, 0.03, 0.10, 7);
    int n_train = 0, n_val = 0, n_test = 0;
    for (int i = 0; i < 100; ++i) {
        n_train += g.train_mask[std::size_t(i)];
        n_val += g.val_mask[std::size_t(i)];
        n_test += g.test_mask[std::size_t(i)];
        // masks are pairwise disjoint and cover every node
        CHECK(g.train_mask[std::size_t(i)] + g.val_mask[std::size_t(i)] +
                  g.test_mask[std::size_t(i)] ==
              1);
    }
    CHECK(n_train == 3);
    CHECK(n_val == 10);
    CHECK(n_test == 87);

    Graph h = two_circles(100, 0.0, 0.05, 1);
    random_split(h, 0.03, 0.10, 7);
    CHECK(g.train_mask == h.train_mask);
    CHECK(g.val_mask == h.val_mask);

    CHECK_THROWS_AS(random_split(g, 0.001, 0.10, 7), std::invalid_argument);  // empty train
    CHECK_THROWS_AS(random_split(g, 0.5, 0.5, 7), std::invalid_argument);     // sums to 1
}

TEST_CASE("feature masking") {
    Graph g = two_circles(1000, 0.01, 0.1, 3);
    g.features = DenseMatrix(1000, 100);
    for (double& v : g.features.data) v = 1.0;

    SUBCASE("p = 0 leaves features untouched") {
        Graph m = mask_features(g, 0.0, 1);
        CHECK(max_abs_diff(m.features, g.features) == 0.0);
    }
    SUBCASE("p = 100 zeroes everything") {
        Graph m = mask_features(g, 100.0, 1);
        CHECK(sum_squares(m.features) == 0.0);
    }
    SUBCASE("p = 50 zeroes exactly half the entries") {
        Graph m = mask_features(g, 50.0, 1);
        std::size_t zeros = 0;
        for (double v : m.features.data) zeros += v == 0.0 ? 1 : 0;
        CHECK(zeros == 50000);
        // structure and labels untouched
        CHECK(m.col_idx == g.col_idx);
        CHECK(m.labels == g.labels);
    }
}

TEST_CASE("gzip-compressed inputs load transparently") {
    TempDir dir;
    const std::string text = "#graph v1\nn 1 d 1 c 1\nE\nX\n2\nY\n0\nM\nnone\n";
    write_file(dir.file("g.graph"), text);
    const std::string cmd = "gzip -k -f " + dir.file("g.graph");
    REQUIRE(std::system(cmd.c_str()) == 0);
    Graph g = load_canonical(dir.file("g.graph.gz"));
    CHECK(g.num_nodes == 1);
    CHECK(g.features(0, 0) == 2.0);
}
