// deepgraph: experiment runner for the deep GNN training engine.
//
// Exit codes: 0 success, 1 configuration error, 2 divergence, 3 gradient
// check failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <fstream>
#include <iostream>
#include <sstream>

#include "deepgraph/datasets.hpp"
#include "deepgraph/model.hpp"
#include "deepgraph/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DatasetOptions {
    std::string dataset;
    int circles_n = 1000;
    double circles_noise = 0.01;
    double circles_threshold = 0.1;
    double split_train = 0.03;
    double split_val = 0.10;
    double mask_rate = 0.0;
    std::uint64_t seed = 0;
};

void add_dataset_flags(CLI::App* cmd, DatasetOptions& opt) {
    cmd->add_option("--dataset", opt.dataset,
                    "'circles', a directory with <name>.content/<name>.cites, or a canonical "
                    "graph file")
        ->required();
    cmd->add_option("--circles-n", opt.circles_n, "two-circles: number of points");
    cmd->add_option("--circles-noise", opt.circles_noise, "two-circles: coordinate noise std");
    cmd->add_option("--circles-threshold", opt.circles_threshold,
                    "two-circles: edge distance threshold");
    cmd->add_option("--split-train", opt.split_train, "training fraction of the random split");
    cmd->add_option("--split-val", opt.split_val, "validation fraction of the random split");
    cmd->add_option("--mask-rate", opt.mask_rate, "percentage of feature entries zeroed");
}

// Locate the content/cites pair inside a citation dataset directory,
// accepting gzipped copies. The two files must share a stem.
std::pair<std::string, std::string> find_citation_pair(const fs::path& dir) {
    auto stem_of = [](std::string name) {
        if (name.ends_with(".gz")) name.resize(name.size() - 3);
        const std::size_t dot = name.rfind('.');
        return name.substr(0, dot);
    };
    std::map<std::string, std::pair<std::string, std::string>> pairs;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.ends_with(".content") || name.ends_with(".content.gz")) {
            pairs[stem_of(name)].first = e.path().string();
        } else if (name.ends_with(".cites") || name.ends_with(".cites.gz")) {
            pairs[stem_of(name)].second = e.path().string();
        }
    }
    std::vector<std::pair<std::string, std::string>> complete;
    for (const auto& [stem, p] : pairs) {
        if (!p.first.empty() && !p.second.empty()) complete.push_back(p);
    }
    if (complete.empty()) {
        throw std::runtime_error("no .content/.cites pair found in " + dir.string());
    }
    if (complete.size() > 1) {
        throw std::runtime_error("multiple citation datasets in " + dir.string() +
                                 "; point --dataset at one of them");
    }
    return complete.front();
}

deepgraph::Graph load_dataset(const DatasetOptions& opt, bool with_split) {
    deepgraph::Graph g;
    if (opt.dataset == "circles") {
        g = deepgraph::two_circles(opt.circles_n, opt.circles_noise, opt.circles_threshold,
                                   opt.seed);
    } else if (fs::is_directory(opt.dataset)) {
        auto [content, cites] = find_citation_pair(opt.dataset);
        deepgraph::LoadStats stats;
        g = deepgraph::load_citation(content, cites, &stats);
        if (stats.dropped_unknown_refs || stats.dropped_self_loops ||
            stats.dropped_duplicate_edges) {
            std::cerr << "warning: dropped " << stats.dropped_unknown_refs << " unknown refs, "
                      << stats.dropped_self_loops << " self-loops, "
                      << stats.dropped_duplicate_edges << " duplicate edges\n";
        }
    } else {
        g = deepgraph::load_canonical(opt.dataset);
    }
    if (opt.mask_rate > 0.0) g = deepgraph::mask_features(g, opt.mask_rate, opt.seed);
    if (with_split) deepgraph::random_split(g, opt.split_train, opt.split_val, opt.seed);
    return g;
}

struct ModelOptions {
    std::string variant = "vanilla";
    int layers = 2;
    int hidden = 50;
    double lambda = 0.0;
    double alpha = 0.0;
    double lr = 0.001;
    double weight_decay = 0.0005;
    double dropout = 0.5;
    int iters = 1500;
    std::uint64_t seed = 0;
    double tau = 1.0;
    int centrals = 10;
    int positives = 5;
    bool stop_grad_sim = false;
    bool linear_projection = false;
};

void add_model_flags(CLI::App* cmd, ModelOptions& opt) {
    cmd->add_option("--variant", opt.variant, "vanilla | resnet | wdg | wdg_s");
    cmd->add_option("--layers,-L", opt.layers,
                    "number of hidden GCN layers (the classifier layer is not counted)");
    cmd->add_option("--hidden", opt.hidden, "hidden feature dimension");
    cmd->add_option("--lambda", opt.lambda, "decay scale for wdg variants");
    cmd->add_option("--alpha", opt.alpha, "weight of the contrastive term");
    cmd->add_option("--lr", opt.lr, "learning rate");
    cmd->add_option("--weight-decay", opt.weight_decay, "L2 penalty coefficient");
    cmd->add_option("--dropout", opt.dropout, "dropout rate");
    cmd->add_option("--iters", opt.iters, "full-batch training iterations");
    cmd->add_option("--seed", opt.seed, "master seed for all randomness");
    cmd->add_option("--tau", opt.tau, "contrastive temperature");
    cmd->add_option("--centrals", opt.centrals, "central nodes sampled per class");
    cmd->add_option("--positives", opt.positives, "positive neighbors per central");
    cmd->add_flag("--stop-grad-sim", opt.stop_grad_sim,
                  "treat the wdg cosine weight as a constant in backward");
    cmd->add_flag("--linear-projection", opt.linear_projection,
                  "use a trained linear embedding head for the contrastive term");
}

deepgraph::TrainConfig make_train_config(const ModelOptions& m) {
    deepgraph::TrainConfig cfg;
    cfg.model.variant = deepgraph::variant_from_string(m.variant);
    cfg.model.depth = m.layers;
    cfg.model.hidden_dim = m.hidden;
    cfg.model.lambda = m.lambda;
    cfg.model.dropout_rate = m.dropout;
    cfg.model.stop_grad_sim = m.stop_grad_sim;
    cfg.tgcl.alpha = m.alpha;
    cfg.tgcl.tau = m.tau;
    cfg.tgcl.per_class_centrals = m.centrals;
    cfg.tgcl.positives_per_central = m.positives;
    cfg.tgcl.linear_projection = m.linear_projection;
    cfg.lr = m.lr;
    cfg.weight_decay = m.weight_decay;
    cfg.iterations = m.iters;
    cfg.seed = m.seed;
    return cfg;
}

json record_to_json(const deepgraph::RunRecord& rec, const deepgraph::TrainConfig& cfg,
                    const DatasetOptions& data) {
    json j;
    j["config"] = {{"variant", deepgraph::to_string(cfg.model.variant)},
                   {"layers", cfg.model.depth},
                   {"hidden", cfg.model.hidden_dim},
                   {"lambda", cfg.model.lambda},
                   {"alpha", cfg.tgcl.alpha},
                   {"tau", cfg.tgcl.tau},
                   {"centrals", cfg.tgcl.per_class_centrals},
                   {"positives", cfg.tgcl.positives_per_central},
                   {"lr", cfg.lr},
                   {"weight_decay", cfg.weight_decay},
                   {"dropout", cfg.model.dropout_rate},
                   {"iterations", cfg.iterations},
                   {"seed", cfg.seed},
                   {"dataset", data.dataset},
                   {"mask_rate", data.mask_rate},
                   {"split_train", data.split_train},
                   {"split_val", data.split_val}};
    j["train_loss"] = rec.train_loss;
    j["loss_gnn"] = rec.loss_gnn;
    j["loss_tgcl"] = rec.loss_tgcl;
    j["val_acc"] = rec.val_acc;
    j["best_val_acc"] = rec.best_val_acc;
    j["best_iteration"] = rec.best_iteration;
    j["test_acc"] = rec.test_acc;
    j["wall_seconds"] = rec.wall_seconds;
    j["tgcl_pairs_checked"] = rec.tgcl_pairs_checked;
    j["diverged"] = rec.diverged;
    json weights = json::array();
    for (auto [l, w] : rec.layer_weights) weights.push_back({l, w});
    j["layer_weights"] = weights;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (double v : parse_double_list(csv)) out.push_back(int(v));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deepgraph: deep GNN training with weight-decaying residuals and a "
                 "topology-guided contrastive loss"};
    app.require_subcommand(1);

    DatasetOptions data;
    ModelOptions model;
    std::string out_path;
    std::string sweep_param;
    std::string sweep_values;
    std::string rates_csv = "25,50,75";
    std::string depths_csv = "2,10,20,60";
    bool approx_diameter = false;
    bool corrupt = false;
    int gc_nodes = 30;
    double gc_p = 0.15;
    std::uint64_t gc_graph_seed = 7;

    CLI::App* train_cmd = app.add_subcommand("train", "train one model and write a JSON record");
    add_dataset_flags(train_cmd, data);
    add_model_flags(train_cmd, model);
    train_cmd->add_option("--out", out_path, "output JSON path");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "train once per hyperparameter value");
    add_dataset_flags(sweep_cmd, data);
    add_model_flags(sweep_cmd, model);
    sweep_cmd->add_option("--param", sweep_param, "lambda | alpha")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep_cmd->add_option("--out", out_path, "output CSV path");

    CLI::App* stats_cmd = app.add_subcommand("stats", "graph statistics and lambda heuristic");
    add_dataset_flags(stats_cmd, data);
    stats_cmd->add_flag("--approx", approx_diameter, "double-sweep diameter lower bound");

    CLI::App* gradcheck_cmd =
        app.add_subcommand("gradcheck", "finite-difference check of the full objective");
    add_model_flags(gradcheck_cmd, model);
    gradcheck_cmd->add_option("--gc-nodes", gc_nodes, "synthetic graph size (max 50)");
    gradcheck_cmd->add_option("--gc-p", gc_p, "synthetic graph edge probability");
    gradcheck_cmd->add_option("--gc-seed", gc_graph_seed, "synthetic graph seed");
    gradcheck_cmd->add_flag("--corrupt", corrupt,
                            "corrupt one gradient group first (oracle self-test)");

    CLI::App* study_cmd = app.add_subcommand(
        "study-missing", "accuracy grid over feature masking rates and depths");
    add_dataset_flags(study_cmd, data);
    add_model_flags(study_cmd, model);
    study_cmd->add_option("--rates", rates_csv, "masking percentages");
    study_cmd->add_option("--depths", depths_csv, "layer counts");
    study_cmd->add_option("--out", out_path, "output CSV path");

    CLI11_PARSE(app, argc, argv);
    data.seed = model.seed;

    try {
        if (train_cmd->parsed()) {
            const deepgraph::Graph g = load_dataset(data, true);
            const deepgraph::TrainConfig cfg = make_train_config(model);
            const deepgraph::RunRecord rec = deepgraph::train(g, cfg);
            const json j = record_to_json(rec, cfg, data);
            if (!out_path.empty()) {
                write_text(out_path, j.dump(2) + "\n");
            } else {
                std::cout << j.dump(2) << "\n";
            }
            std::cout << "test_acc " << rec.test_acc << " best_val " << rec.best_val_acc
                      << " (iteration " << rec.best_iteration << ")\n";
            if (rec.diverged) {
                std::cerr << "training diverged at iteration " << rec.divergence_iteration << "\n";
                return 2;
            }
        } else if (sweep_cmd->parsed()) {
            const deepgraph::Graph g = load_dataset(data, true);
            deepgraph::TrainConfig cfg = make_train_config(model);
            deepgraph::SweepParam p;
            if (sweep_param == "lambda") {
                p = deepgraph::SweepParam::lambda;
            } else if (sweep_param == "alpha") {
                p = deepgraph::SweepParam::alpha;
            } else {
                std::cerr << "unknown sweep parameter: " << sweep_param << "\n";
                return 1;
            }
            const auto rows = deepgraph::sweep(g, cfg, p, parse_double_list(sweep_values));
            std::ostringstream csv;
            csv << sweep_param << ",test_acc,best_val_acc\n";
            for (const auto& r : rows) {
                csv << r.value << "," << r.test_acc << "," << r.best_val_acc << "\n";
            }
            if (!out_path.empty()) write_text(out_path, csv.str());
            std::cout << csv.str();
        } else if (stats_cmd->parsed()) {
            const deepgraph::Graph g = load_dataset(data, false);
            const auto r = deepgraph::compute_stats(g, approx_diameter);
            std::cout << "nodes " << r.num_nodes << "\n"
                      << "edges " << r.num_edges << "\n"
                      << "components " << r.components << "\n"
                      << "diameter " << r.diameter << (approx_diameter ? " (lower bound)" : "")
                      << "\n"
                      << "lambda search range [" << r.lambda_lo << ", " << r.lambda_hi << "]\n";
        } else if (gradcheck_cmd->parsed()) {
            if (gc_nodes > 50) {
                std::cerr << "gradcheck graphs are capped at 50 nodes\n";
                return 1;
            }
            deepgraph::TrainConfig cfg = make_train_config(model);
            if ((cfg.model.variant == deepgraph::Variant::wdg ||
                 cfg.model.variant == deepgraph::Variant::wdg_s) &&
                cfg.model.lambda <= 0.0) {
                cfg.model.lambda = 10.0;
            }
            const deepgraph::Graph g =
                deepgraph::erdos_renyi_classification(gc_nodes, gc_p, gc_graph_seed, 8, 3);
            const auto report =
                deepgraph::gradcheck_harness(g, cfg, 1e-6, 200, corrupt ? 0 : -1);
            for (const auto& grp : report.fd.groups) {
                std::cout << grp.name << ": max rel error " << grp.max_relative_error << " over "
                          << grp.coords_checked << " coords\n";
            }
            std::cout << "overall max rel error " << report.fd.max_relative_error << " ("
                      << report.fd.coords_checked << " coords)\n";
            if (!report.passed) {
                std::cerr << "gradient check FAILED (threshold " << report.threshold << ")\n";
                return 3;
            }
            std::cout << "gradient check passed\n";
        } else if (study_cmd->parsed()) {
            const deepgraph::Graph g = load_dataset(data, true);
            deepgraph::TrainConfig cfg = make_train_config(model);
            const auto study = deepgraph::missing_feature_study(
                g, cfg, parse_double_list(rates_csv), parse_int_list(depths_csv));
            std::ostringstream csv;
            csv << "rate,depth,test_acc\n";
            for (const auto& c : study.cells) {
                csv << c.rate << "," << c.depth << "," << c.test_acc << "\n";
            }
            if (!out_path.empty()) write_text(out_path, csv.str());
            std::cout << csv.str();
            for (auto [rate, depth, acc] : study.best_per_rate) {
                std::cout << "rate " << rate << "%: best depth " << depth << " (test_acc " << acc
                          << ")\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
