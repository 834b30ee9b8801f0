#include "deepgraph/datasets.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "deepgraph/rng.hpp"

namespace deepgraph {

namespace {

std::string inflate_gzip(const std::string& raw, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
        throw std::runtime_error(path + ": inflateInit failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
    zs.avail_in = uInt(raw.size());
    std::string out;
    char buf[1 << 16];
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error(path + ": corrupt gzip stream");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) toks.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

double parse_real(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
        throw std::runtime_error(context + ": not a number: '" + tok + "'");
    }
    return v;
}

int parse_int(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size()) {
        throw std::runtime_error(context + ": not an integer: '" + tok + "'");
    }
    return int(v);
}

// splits text into lines, dropping a trailing '\r' per line
std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string raw = ss.str();
    if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0x1f &&
        static_cast<unsigned char>(raw[1]) == 0x8b) {
        return inflate_gzip(raw, path);
    }
    return raw;
}

Graph load_citation(const std::string& content_path, const std::string& cites_path,
                    LoadStats* stats) {
    const std::vector<std::string> content_lines = split_lines(read_text_file(content_path));

    std::unordered_map<std::string, int> id_of;
    std::unordered_map<std::string, int> class_of;
    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    int dim = -1;

    for (std::size_t ln = 0; ln < content_lines.size(); ++ln) {
        const std::string& line = content_lines[ln];
        if (line.empty()) continue;
        const std::string ctx = content_path + ":" + std::to_string(ln + 1);
        const std::vector<std::string> toks = tokenize(line);
        if (toks.size() < 3) throw std::runtime_error(ctx + ": malformed row");
        if (dim == -1) {
            dim = int(toks.size()) - 2;
        } else if (int(toks.size()) - 2 != dim) {
            throw std::runtime_error(ctx + ": inconsistent attribute count (expected " +
                                     std::to_string(dim) + ", got " +
                                     std::to_string(toks.size() - 2) + ")");
        }
        const std::string& id = toks.front();
        if (!id_of.emplace(id, int(feats.size())).second) {
            throw std::runtime_error(ctx + ": duplicate node id '" + id + "'");
        }
        std::vector<double> row(std::size_t(dim), 0.0);
        for (int j = 0; j < dim; ++j) row[std::size_t(j)] = parse_real(toks[std::size_t(j) + 1], ctx);
        feats.push_back(std::move(row));
        const std::string& cls = toks.back();
        const auto [it, inserted] = class_of.emplace(cls, int(class_of.size()));
        labels.push_back(it->second);
        (void)inserted;
    }

    const int n = int(feats.size());
    std::vector<std::pair<int, int>> edges;
    int unknown = 0;
    const std::vector<std::string> cites_lines = split_lines(read_text_file(cites_path));
    for (std::size_t ln = 0; ln < cites_lines.size(); ++ln) {
        const std::string& line = cites_lines[ln];
        if (line.empty()) continue;
        const std::string ctx = cites_path + ":" + std::to_string(ln + 1);
        const std::vector<std::string> toks = tokenize(line);
        if (toks.size() != 2) throw std::runtime_error(ctx + ": malformed row");
        const auto a = id_of.find(toks[0]);
        const auto b = id_of.find(toks[1]);
        if (a == id_of.end() || b == id_of.end()) {
            ++unknown;
            continue;
        }
        edges.emplace_back(a->second, b->second);
    }

    int self_loops = 0, duplicates = 0;
    Graph g = Graph::from_edges(n, std::move(edges), &self_loops, &duplicates);
    if (stats) {
        stats->dropped_unknown_refs = unknown;
        stats->dropped_self_loops = self_loops;
        stats->dropped_duplicate_edges = duplicates;
    }

    g.features = DenseMatrix(n, dim < 0 ? 0 : dim);
    for (int i = 0; i < n; ++i) {
        std::copy(feats[std::size_t(i)].begin(), feats[std::size_t(i)].end(), g.features.row(i));
    }
    g.labels = std::move(labels);
    g.num_classes = int(class_of.size());
    g.train_mask.assign(std::size_t(n), 0);
    g.val_mask.assign(std::size_t(n), 0);
    g.test_mask.assign(std::size_t(n), 0);
    return g;
}

Graph load_canonical(const std::string& path, LoadStats* stats) {
    const std::vector<std::string> lines = split_lines(read_text_file(path));
    std::size_t ln = 0;
    auto next_line = [&]() -> const std::string& {
        if (ln >= lines.size()) throw std::runtime_error(path + ": unexpected end of file");
        return lines[ln++];
    };
    auto ctx = [&]() { return path + ":" + std::to_string(ln); };

    if (next_line() != "#graph v1") throw std::runtime_error(path + ": missing '#graph v1' header");
    const std::vector<std::string> hdr = tokenize(next_line());
    if (hdr.size() != 6 || hdr[0] != "n" || hdr[2] != "d" || hdr[4] != "c") {
        throw std::runtime_error(ctx() + ": malformed size header");
    }
    const int n = parse_int(hdr[1], ctx());
    const int d = parse_int(hdr[3], ctx());
    const int c = parse_int(hdr[5], ctx());
    if (n < 0 || d < 0 || c < 0) throw std::runtime_error(ctx() + ": negative size");

    if (next_line() != "E") throw std::runtime_error(ctx() + ": expected 'E'");
    std::vector<std::pair<int, int>> edges;
    while (true) {
        const std::string& line = next_line();
        if (line == "X") break;
        const std::vector<std::string> toks = tokenize(line);
        if (toks.size() != 2) throw std::runtime_error(ctx() + ": malformed edge row");
        edges.emplace_back(parse_int(toks[0], ctx()), parse_int(toks[1], ctx()));
    }

    int self_loops = 0, duplicates = 0;
    Graph g = Graph::from_edges(n, std::move(edges), &self_loops, &duplicates);
    if (stats) {
        stats->dropped_self_loops = self_loops;
        stats->dropped_duplicate_edges = duplicates;
    }

    g.features = DenseMatrix(n, d);
    for (int i = 0; i < n; ++i) {
        const std::vector<std::string> toks = tokenize(next_line());
        if (int(toks.size()) != d) throw std::runtime_error(ctx() + ": expected " + std::to_string(d) + " features");
        for (int j = 0; j < d; ++j) g.features(i, j) = parse_real(toks[std::size_t(j)], ctx());
    }

    if (next_line() != "Y") throw std::runtime_error(ctx() + ": expected 'Y'");
    g.labels.resize(std::size_t(n));
    g.num_classes = c;
    for (int i = 0; i < n; ++i) {
        const int y = parse_int(next_line(), ctx());
        if (y < 0 || y >= c) throw std::runtime_error(ctx() + ": label out of range");
        g.labels[std::size_t(i)] = y;
    }

    if (next_line() != "M") throw std::runtime_error(ctx() + ": expected 'M'");
    g.train_mask.assign(std::size_t(n), 0);
    g.val_mask.assign(std::size_t(n), 0);
    g.test_mask.assign(std::size_t(n), 0);
    for (int i = 0; i < n; ++i) {
        const std::string& m = next_line();
        if (m == "train") {
            g.train_mask[std::size_t(i)] = 1;
        } else if (m == "val") {
            g.val_mask[std::size_t(i)] = 1;
        } else if (m == "test") {
            g.test_mask[std::size_t(i)] = 1;
        } else if (m != "none") {
            throw std::runtime_error(ctx() + ": bad mask value '" + m + "'");
        }
    }
    return g;
}

void save_canonical(const Graph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "#graph v1\n";
    out << "n " << graph.num_nodes << " d " << graph.features.cols << " c " << graph.num_classes
        << "\n";
    out << "E\n";
    for (int i = 0; i < graph.num_nodes; ++i) {
        for (int j : graph.neighbors(i)) {
            if (i < j) out << i << " " << j << "\n";
        }
    }
    out << "X\n";
    char buf[64];
    for (int i = 0; i < graph.num_nodes; ++i) {
        for (int j = 0; j < graph.features.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", graph.features(i, j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
    out << "Y\n";
    for (int i = 0; i < graph.num_nodes; ++i) {
        out << (graph.labels.empty() ? 0 : graph.labels[std::size_t(i)]) << "\n";
    }
    out << "M\n";
    for (int i = 0; i < graph.num_nodes; ++i) {
        const char* m = "none";
        if (!graph.train_mask.empty() && graph.train_mask[std::size_t(i)]) m = "train";
        else if (!graph.val_mask.empty() && graph.val_mask[std::size_t(i)]) m = "val";
        else if (!graph.test_mask.empty() && graph.test_mask[std::size_t(i)]) m = "test";
        out << m << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Graph two_circles(int num_points, double noise, double threshold, std::uint64_t seed) {
    if (num_points < 2) throw std::invalid_argument("two_circles: need at least 2 points");
    if (threshold <= 0.0) throw std::invalid_argument("two_circles: threshold must be > 0");
    if (noise < 0.0) throw std::invalid_argument("two_circles: noise must be >= 0");

    const int n_outer = num_points / 2;
    const int n_inner = num_points - n_outer;
    Rng rng = Rng::stream(seed, 0xC17C1E5ULL);

    DenseMatrix pts(num_points, 2);
    std::vector<int> labels(std::size_t(num_points), 0);
    for (int t = 0; t < n_outer; ++t) {
        const double a = 2.0 * std::numbers::pi * double(t) / double(n_outer);
        pts(t, 0) = std::cos(a);
        pts(t, 1) = std::sin(a);
        labels[std::size_t(t)] = 0;
    }
    for (int t = 0; t < n_inner; ++t) {
        const double a = 2.0 * std::numbers::pi * double(t) / double(n_inner);
        pts(n_outer + t, 0) = 0.5 * std::cos(a);
        pts(n_outer + t, 1) = 0.5 * std::sin(a);
        labels[std::size_t(n_outer + t)] = 1;
    }
    if (noise > 0.0) {
        for (std::size_t i = 0; i < pts.size(); ++i) pts.data[i] += noise * rng.normal();
    }

    std::vector<std::pair<int, int>> edges;
    const double t2 = threshold * threshold;
    for (int i = 0; i < num_points; ++i) {
        for (int j = i + 1; j < num_points; ++j) {
            const double dx = pts(i, 0) - pts(j, 0);
            const double dy = pts(i, 1) - pts(j, 1);
            if (dx * dx + dy * dy < t2) edges.emplace_back(i, j);
        }
    }

    Graph g = Graph::from_edges(num_points, std::move(edges));
    g.features = std::move(pts);
    g.labels = std::move(labels);
    g.num_classes = 2;
    g.train_mask.assign(std::size_t(num_points), 0);
    g.val_mask.assign(std::size_t(num_points), 0);
    g.test_mask.assign(std::size_t(num_points), 0);
    return g;
}

void random_split(Graph& graph, double train_frac, double val_frac, std::uint64_t seed) {
    if (train_frac < 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0) {
        throw std::invalid_argument("random_split: fractions must be >= 0 and sum < 1");
    }
    const int n = graph.num_nodes;
    const int n_train = int(std::llround(train_frac * n));
    const int n_val = int(std::llround(val_frac * n));
    if (n_train < 1) throw std::invalid_argument("random_split: train split is empty");
    if (n_train + n_val > n) throw std::invalid_argument("random_split: splits exceed node count");

    std::vector<int> perm(std::size_t(n), 0);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = Rng::stream(seed, 0x5B717ULL);
    rng.shuffle(perm);

    graph.train_mask.assign(std::size_t(n), 0);
    graph.val_mask.assign(std::size_t(n), 0);
    graph.test_mask.assign(std::size_t(n), 0);
    for (int i = 0; i < n_train; ++i) graph.train_mask[std::size_t(perm[std::size_t(i)])] = 1;
    for (int i = n_train; i < n_train + n_val; ++i) graph.val_mask[std::size_t(perm[std::size_t(i)])] = 1;
    for (int i = n_train + n_val; i < n; ++i) graph.test_mask[std::size_t(perm[std::size_t(i)])] = 1;
}

Graph mask_features(const Graph& graph, double p_percent, std::uint64_t seed) {
    if (p_percent < 0.0 || p_percent > 100.0) {
        throw std::invalid_argument("mask_features: p must be in [0, 100]");
    }
    Graph out = graph;
    const std::size_t total = out.features.size();
    const std::size_t count = std::size_t(std::floor(p_percent / 100.0 * double(total)));
    if (count == 0) return out;

    // partial Fisher-Yates over the flat entry indices
    std::vector<std::uint32_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = std::uint32_t(i);
    Rng rng = Rng::stream(seed, 0x3A5CULL);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + std::size_t(rng.uniform_int(int(total - i)));
        std::swap(idx[i], idx[j]);
        out.features.data[idx[i]] = 0.0;
    }
    return out;
}

}  // namespace deepgraph
