#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "deepgraph/datasets.hpp"
#include "deepgraph/model.hpp"
#include "deepgraph/tgcl.hpp"
#include "deepgraph/train.hpp"

namespace py = pybind11;
using namespace deepgraph;

namespace {

py::list features_as_list(const Graph& g) {
    py::list rows;
    for (int i = 0; i < g.num_nodes; ++i) {
        py::list row;
        for (int j = 0; j < g.features.cols; ++j) row.append(g.features(i, j));
        rows.append(row);
    }
    return rows;
}

TrainConfig build_config(const std::string& variant, int layers, int hidden, double lambda,
                         double alpha, double lr, double weight_decay, double dropout, int iters,
                         std::uint64_t seed, double tau, int centrals, int positives) {
    TrainConfig cfg;
    cfg.model.variant = variant_from_string(variant);
    cfg.model.depth = layers;
    cfg.model.hidden_dim = hidden;
    cfg.model.lambda = lambda;
    cfg.model.dropout_rate = dropout;
    cfg.tgcl.alpha = alpha;
    cfg.tgcl.tau = tau;
    cfg.tgcl.per_class_centrals = centrals;
    cfg.tgcl.positives_per_central = positives;
    cfg.lr = lr;
    cfg.weight_decay = weight_decay;
    cfg.iterations = iters;
    cfg.seed = seed;
    return cfg;
}

py::dict record_to_dict(const RunRecord& rec) {
    py::dict d;
    d["train_loss"] = rec.train_loss;
    d["loss_gnn"] = rec.loss_gnn;
    d["loss_tgcl"] = rec.loss_tgcl;
    d["val_acc"] = rec.val_acc;
    d["best_val_acc"] = rec.best_val_acc;
    d["best_iteration"] = rec.best_iteration;
    d["test_acc"] = rec.test_acc;
    d["wall_seconds"] = rec.wall_seconds;
    d["layer_weights"] = rec.layer_weights;
    d["tgcl_pairs_checked"] = rec.tgcl_pairs_checked;
    d["diverged"] = rec.diverged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Deep GNN training engine: weight-decaying graph residual connections and a "
              "topology-guided contrastive loss";

    py::class_<Graph>(m, "Graph")
        .def_readonly("num_nodes", &Graph::num_nodes)
        .def_readonly("num_classes", &Graph::num_classes)
        .def_readonly("labels", &Graph::labels)
        .def_property_readonly("num_edges", [](const Graph& g) { return g.num_edges(); })
        .def_property_readonly("feature_dim", [](const Graph& g) { return g.features.cols; })
        .def("degree", &Graph::degree)
        .def("neighbors",
             [](const Graph& g, int i) {
                 auto nb = g.neighbors(i);
                 return std::vector<int>(nb.begin(), nb.end());
             })
        .def("adjacent", &Graph::adjacent)
        .def("features", &features_as_list);

    m.def("from_edges",
          [](int n, const std::vector<std::pair<int, int>>& edges) {
              return Graph::from_edges(n, edges);
          },
          py::arg("num_nodes"), py::arg("edges"));
    m.def("load_citation",
          [](const std::string& content, const std::string& cites) {
              return load_citation(content, cites);
          },
          py::arg("content_path"), py::arg("cites_path"));
    m.def("load_canonical", [](const std::string& p) { return load_canonical(p); }, py::arg("path"));
    m.def("save_canonical", &save_canonical, py::arg("graph"), py::arg("path"));
    m.def("two_circles", &two_circles, py::arg("num_points"), py::arg("noise"),
          py::arg("threshold"), py::arg("seed"));
    m.def("random_split", &random_split, py::arg("graph"), py::arg("train_frac"),
          py::arg("val_frac"), py::arg("seed"));
    m.def("mask_features", &mask_features, py::arg("graph"), py::arg("p_percent"), py::arg("seed"));

    m.def("hamming_distance", &hamming_distance, py::arg("graph"), py::arg("i"), py::arg("j"));
    m.def("connected_components", &connected_components, py::arg("graph"));
    m.def("diameter_largest_component", &diameter_largest_component, py::arg("graph"),
          py::arg("approx") = false);

    m.def("decay_factor", &decay_factor, py::arg("layer"), py::arg("lambda_"));
    m.def("node_influence", &node_influence, py::arg("graph"), py::arg("source"),
          py::arg("center"), py::arg("hops"));
    m.def("sigma_weight", &sigma_weight, py::arg("graph"), py::arg("i"), py::arg("j"));
    m.def("gamma_weight", &gamma_weight, py::arg("graph"), py::arg("i"), py::arg("k"));

    m.def("graph_stats", [](const Graph& g, bool approx) {
        const auto r = compute_stats(g, approx);
        py::dict d;
        d["num_nodes"] = r.num_nodes;
        d["num_edges"] = r.num_edges;
        d["components"] = r.components;
        d["diameter"] = r.diameter;
        d["lambda_range"] = py::make_tuple(r.lambda_lo, r.lambda_hi);
        return d;
    }, py::arg("graph"), py::arg("approx") = false);

    m.def("train",
          [](const Graph& g, const std::string& variant, int layers, int hidden, double lambda,
             double alpha, double lr, double weight_decay, double dropout, int iters,
             std::uint64_t seed, double tau, int centrals, int positives) {
              const TrainConfig cfg = build_config(variant, layers, hidden, lambda, alpha, lr,
                                                   weight_decay, dropout, iters, seed, tau,
                                                   centrals, positives);
              return record_to_dict(train(g, cfg));
          },
          py::arg("graph"), py::arg("variant") = "vanilla", py::arg("layers") = 2,
          py::arg("hidden") = 50, py::arg("lambda_") = 0.0, py::arg("alpha") = 0.0,
          py::arg("lr") = 0.001, py::arg("weight_decay") = 0.0005, py::arg("dropout") = 0.5,
          py::arg("iters") = 1500, py::arg("seed") = 0, py::arg("tau") = 1.0,
          py::arg("centrals") = 10, py::arg("positives") = 5);

    m.def("gradcheck",
          [](const std::string& variant, int layers, double alpha, double lambda, int nodes,
             double p, std::uint64_t graph_seed, int hidden) {
              TrainConfig cfg = build_config(variant, layers, hidden, lambda, alpha, 0.001, 0.0005,
                                             0.0, 0, 0, 1.0, 10, 5);
              if ((cfg.model.variant == Variant::wdg || cfg.model.variant == Variant::wdg_s) &&
                  cfg.model.lambda <= 0.0) {
                  cfg.model.lambda = 10.0;
              }
              const Graph g = erdos_renyi_classification(nodes, p, graph_seed, 8, 3);
              const auto rep = gradcheck_harness(g, cfg);
              py::dict d;
              d["max_relative_error"] = rep.fd.max_relative_error;
              d["coords_checked"] = rep.fd.coords_checked;
              d["passed"] = rep.passed;
              return d;
          },
          py::arg("variant") = "wdg", py::arg("layers") = 6, py::arg("alpha") = 0.03,
          py::arg("lambda_") = 10.0, py::arg("nodes") = 30, py::arg("p") = 0.15,
          py::arg("graph_seed") = 7, py::arg("hidden") = 16);

    m.def("set_num_threads", &set_num_threads, py::arg("n"));
}
