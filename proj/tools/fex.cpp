// fex: train and run amortized feature-attribution explainers for
// probabilistic classifiers, with an exhaustive oracle for verification.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fex/bridge.hpp"
#include "fex/checkpoint.hpp"
#include "fex/eval.hpp"
#include "fex/oracle.hpp"
#include "fex/parallel.hpp"
#include "fex/policy.hpp"
#include "fex/predictor.hpp"
#include "fex/synthdata.hpp"
#include "fex/trainer.hpp"
#include "fex/types.hpp"

using nlohmann::json;

namespace {

std::vector<std::size_t> parse_hidden(const std::string& spec) {
    std::vector<std::size_t> sizes;
    std::string cur;
    for (char c : spec + ",") {
        if (c == ',') {
            if (!cur.empty()) {
                sizes.push_back(static_cast<std::size_t>(std::stoul(cur)));
                cur.clear();
            }
        } else if (c >= '0' && c <= '9') {
            cur.push_back(c);
        } else {
            throw fex::ConfigError("bad hidden-layer spec '" + spec + "'");
        }
    }
    if (sizes.empty()) throw fex::ConfigError("hidden-layer spec must name at least one size");
    return sizes;
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fex::IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw fex::IoError("short write to '" + path + "'");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fex::IoError("cannot open '" + path + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw fex::ParseError("'" + path + "' is not valid JSON");
    return doc;
}

fex::Sample load_sample(const std::string& input_path, const std::string& data_path,
                        std::int64_t row) {
    if (!input_path.empty()) {
        const json doc = load_json_file(input_path);
        if (doc.is_array()) return fex::Sample(doc.get<std::vector<double>>());
        if (doc.is_object() && doc.contains("features")) {
            return fex::Sample(doc["features"].get<std::vector<double>>());
        }
        throw fex::ParseError("'" + input_path + "' must be a features array or object");
    }
    if (!data_path.empty()) {
        const fex::LabeledDataset d = fex::load_csv(data_path);
        if (row < 0 || static_cast<std::size_t>(row) >= d.samples.size()) {
            throw fex::ConfigError("--row out of range for '" + data_path + "'");
        }
        return d.samples[static_cast<std::size_t>(row)];
    }
    throw fex::ConfigError("one of --input or --data is required");
}

/// Owns whichever predictor source was requested (checkpoint or bridge).
struct PredictorHandle {
    std::unique_ptr<fex::Predictor> owned;
    std::unique_ptr<fex::SynchronizedPredictor> synced;

    const fex::Predictor& get() const { return synced ? *synced : *owned; }
};

PredictorHandle open_predictor(const std::string& ckpt, const std::string& bridge_cmd) {
    PredictorHandle h;
    if (!ckpt.empty() && !bridge_cmd.empty()) {
        throw fex::ConfigError("--predictor and --bridge are mutually exclusive");
    }
    if (!ckpt.empty()) {
        h.owned = std::make_unique<fex::BuiltinPredictor>(fex::load_predictor_checkpoint(ckpt));
        return h;
    }
    if (!bridge_cmd.empty()) {
        h.owned = fex::open_blackbox_bridge(bridge_cmd);
        // bridges are exclusive-use; serialize concurrent callers
        h.synced = std::make_unique<fex::SynchronizedPredictor>(*h.owned);
        return h;
    }
    throw fex::ConfigError("one of --predictor or --bridge is required");
}

/// Applies config-file values to options the user did not pass explicitly,
/// so precedence is flags > config file > defaults.
void apply_config_file(CLI::App& app, const std::string& config_path) {
    if (config_path.empty()) return;
    const json cfg = load_json_file(config_path);
    if (!cfg.is_object()) throw fex::ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (opt == nullptr || opt->count() > 0) continue;
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else {
            text = value.dump();
        }
        opt->add_result(text);
        opt->run_callback();
    }
}

int run(int argc, char** argv) {
    CLI::App app{"fast amortized feature-attribution explainer"};
    app.require_subcommand(1);

    unsigned threads = fex::default_thread_count();
    app.add_option("--threads", threads, "worker threads for parallel sections");

    // ---------------- gen-data ----------------
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic labeled dataset");
    std::string gen_task = "planted";
    std::size_t gen_samples = 1000, gen_features = 10, gen_informative = 1;
    double gen_threshold = 0.5;
    std::uint64_t gen_seed = 0;
    std::string gen_out, gen_config;
    gen->add_option("--task", gen_task, "planted | two-class-disjoint");
    gen->add_option("--samples", gen_samples, "number of samples");
    gen->add_option("--features", gen_features, "feature count N");
    gen->add_option("--informative", gen_informative, "planted subset size");
    gen->add_option("--threshold", gen_threshold, "planted decision threshold");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--config", gen_config, "JSON config file");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // ---------------- train-predictor ----------------
    auto* tp = app.add_subcommand("train-predictor", "train the builtin softmax MLP");
    std::string tp_data, tp_out, tp_hidden = "32,32", tp_config, tp_log;
    std::size_t tp_epochs = 40, tp_batch = 32;
    double tp_lr = 1e-3;
    std::uint64_t tp_seed = 0;
    tp->add_option("--data", tp_data, "training CSV")->required();
    tp->add_option("--hidden", tp_hidden, "hidden sizes, e.g. 32,32");
    tp->add_option("--epochs", tp_epochs, "training epochs");
    tp->add_option("--lr", tp_lr, "Adam learning rate");
    tp->add_option("--batch-size", tp_batch, "minibatch size");
    tp->add_option("--seed", tp_seed, "training seed");
    tp->add_option("--config", tp_config, "JSON config file");
    tp->add_option("--log", tp_log, "per-epoch loss log (ndjson)");
    tp->add_option("--out", tp_out, "checkpoint path")->required();

    // ---------------- train-explainer ----------------
    auto* te = app.add_subcommand("train-explainer", "PPO-train explainer and value networks");
    std::string te_data, te_pred, te_bridge, te_out_g, te_out_v, te_log, te_config;
    std::string te_hidden = "64,64", te_value_hidden = "64,64";
    fex::TrainingConfig tc;
    te->add_option("--data", te_data, "training CSV")->required();
    te->add_option("--predictor", te_pred, "predictor checkpoint");
    te->add_option("--bridge", te_bridge, "black-box bridge command");
    te->add_option("--hidden", te_hidden, "explainer hidden sizes");
    te->add_option("--value-hidden", te_value_hidden, "value-net hidden sizes");
    te->add_option("--epochs", tc.epochs, "training epochs");
    te->add_option("--lr", tc.lr, "Adam learning rate");
    te->add_option("--batch-size", tc.batch_size, "batch size");
    te->add_option("--trajectory-length", tc.trajectory_length, "masks per trajectory (T)");
    te->add_option("--clip-eps", tc.clip_eps, "PPO clip range");
    te->add_option("--lambda-en", tc.lambda_en, "entropy coefficient");
    te->add_option("--lambda-v", tc.lambda_v, "value-loss coefficient");
    te->add_option("--lambda-kl", tc.lambda_kl, "KL coefficient");
    te->add_option("--inner-updates", tc.inner_updates, "updates per collection (U)");
    te->add_flag("--normalize-advantages", tc.normalize_advantages,
                 "batch-standardize advantages");
    te->add_option("--seed", tc.seed, "training seed");
    te->add_option("--config", te_config, "JSON config file");
    te->add_option("--log", te_log, "training log (ndjson)");
    te->add_option("--out-explainer", te_out_g, "explainer checkpoint")->required();
    te->add_option("--out-value", te_out_v, "value checkpoint")->required();

    // ---------------- explain ----------------
    auto* ex = app.add_subcommand("explain", "one explainer forward pass for one sample");
    std::string ex_g, ex_input, ex_data, ex_pred, ex_bridge, ex_out, ex_config;
    std::int64_t ex_row = 0, ex_class = -1;
    ex->add_option("--explainer", ex_g, "explainer checkpoint")->required();
    ex->add_option("--input", ex_input, "sample JSON ({\"features\":[...]})");
    ex->add_option("--data", ex_data, "CSV to take --row from");
    ex->add_option("--row", ex_row, "row index into --data");
    ex->add_option("--class", ex_class, "class to explain (default: predictor argmax)");
    ex->add_option("--predictor", ex_pred, "predictor checkpoint (argmax class)");
    ex->add_option("--bridge", ex_bridge, "bridge command (argmax class)");
    ex->add_option("--config", ex_config, "JSON config file");
    ex->add_option("--out", ex_out, "output JSON (default stdout)");

    // ---------------- oracle ----------------
    auto* orc = app.add_subcommand("oracle", "exhaustive or Monte Carlo empirical attribution");
    std::string orc_pred, orc_bridge, orc_input, orc_data, orc_out, orc_config;
    std::string orc_estimator = "exact";
    std::int64_t orc_row = 0, orc_class = -1;
    std::size_t orc_mc_samples = 1000, orc_cap = fex::kMaxOracleFeatures;
    std::uint64_t orc_seed = 0;
    orc->add_option("--predictor", orc_pred, "predictor checkpoint");
    orc->add_option("--bridge", orc_bridge, "black-box bridge command");
    orc->add_option("--input", orc_input, "sample JSON");
    orc->add_option("--data", orc_data, "CSV to take --row from");
    orc->add_option("--row", orc_row, "row index into --data");
    orc->add_option("--class", orc_class, "class index (default: predictor argmax)");
    orc->add_option("--estimator", orc_estimator, "exact | mc");
    orc->add_option("--samples", orc_mc_samples, "Monte Carlo sample count");
    orc->add_option("--max-features", orc_cap, "enumeration capacity");
    orc->add_option("--seed", orc_seed, "Monte Carlo seed");
    orc->add_option("--config", orc_config, "JSON config file");
    orc->add_option("--out", orc_out, "output JSON (default stdout)");

    // ---------------- eval ----------------
    auto* ev = app.add_subcommand("eval", "masking-curve AUCs and recovery metrics");
    std::string ev_g, ev_pred, ev_bridge, ev_data, ev_out, ev_curves, ev_config;
    bool ev_with_oracle = false;
    std::size_t ev_oracle_cap = fex::kMaxOracleFeatures;
    ev->add_option("--explainer", ev_g, "explainer checkpoint")->required();
    ev->add_option("--predictor", ev_pred, "predictor checkpoint");
    ev->add_option("--bridge", ev_bridge, "black-box bridge command");
    ev->add_option("--data", ev_data, "evaluation CSV")->required();
    ev->add_flag("--with-oracle", ev_with_oracle, "also compute oracle agreement");
    ev->add_option("--oracle-max-features", ev_oracle_cap, "oracle capacity");
    ev->add_option("--config", ev_config, "JSON config file");
    ev->add_option("--curves", ev_curves, "CSV prefix for mean masking curves");
    ev->add_option("--out", ev_out, "output JSON (default stdout)");

    // ---------------- bench ----------------
    auto* bn = app.add_subcommand("bench", "inference cost: explainer vs Monte Carlo");
    std::string bn_g, bn_pred, bn_bridge, bn_data, bn_out, bn_config;
    std::size_t bn_mc = 100, bn_count = 1000;
    bn->add_option("--explainer", bn_g, "explainer checkpoint")->required();
    bn->add_option("--predictor", bn_pred, "predictor checkpoint");
    bn->add_option("--bridge", bn_bridge, "black-box bridge command");
    bn->add_option("--data", bn_data, "dataset CSV")->required();
    bn->add_option("--mc-samples", bn_mc, "Monte Carlo queries per explanation");
    bn->add_option("--explanations", bn_count, "number of explanations");
    bn->add_option("--config", bn_config, "JSON config file");
    bn->add_option("--out", bn_out, "output JSON (default stdout)");

    // ---------------- serve-bridge ----------------
    auto* sv = app.add_subcommand("serve-bridge",
                                  "expose a checkpointed predictor over the wire protocol");
    std::string sv_pred;
    sv->add_option("--predictor", sv_pred, "predictor checkpoint")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 64;
    }

    auto emit = [&](const std::string& path, const json& doc) {
        if (path.empty()) {
            std::cout << doc.dump(2) << "\n";
        } else {
            write_json_file(path, doc);
        }
    };

    if (*gen) {
        apply_config_file(*gen, gen_config);
        fex::LabeledDataset d;
        if (gen_task == "planted") {
            d = fex::gen_planted(gen_samples, gen_features, gen_informative, gen_threshold,
                                 gen_seed);
        } else if (gen_task == "two-class-disjoint") {
            d = fex::gen_two_class_disjoint(gen_samples, gen_features, gen_seed);
        } else {
            throw fex::ConfigError("unknown task '" + gen_task + "'");
        }
        fex::save_csv(d, gen_out);
        json summary;
        summary["task"] = gen_task;
        summary["samples"] = d.samples.size();
        summary["n_features"] = d.n_features;
        summary["n_classes"] = d.n_classes;
        summary["out"] = gen_out;
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (*tp) {
        apply_config_file(*tp, tp_config);
        const fex::LabeledDataset d = fex::load_csv(tp_data);
        fex::PredictorTrainOptions opts;
        opts.hidden_sizes = parse_hidden(tp_hidden);
        opts.epochs = tp_epochs;
        opts.lr = tp_lr;
        opts.batch_size = tp_batch;
        opts.seed = tp_seed;
        fex::PredictorTrainLog log;
        const fex::BuiltinPredictor p = fex::train_builtin(d, opts, &log);

        json cfg;
        cfg["hidden"] = tp_hidden;
        cfg["epochs"] = tp_epochs;
        cfg["lr"] = tp_lr;
        cfg["batch_size"] = tp_batch;
        cfg["seed"] = tp_seed;
        cfg["data"] = tp_data;
        fex::save_predictor_checkpoint(tp_out, p, tp_seed, cfg.dump());

        if (!tp_log.empty()) {
            std::ofstream lout(tp_log, std::ios::binary);
            if (!lout) throw fex::IoError("cannot open '" + tp_log + "' for writing");
            for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
                json rec;
                rec["epoch"] = e;
                rec["loss"] = log.epoch_loss[e];
                lout << rec.dump() << "\n";
            }
        }
        json summary;
        summary["out"] = tp_out;
        summary["train_accuracy"] = fex::accuracy(p, d);
        summary["config"] = cfg;
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (*te) {
        apply_config_file(*te, te_config);
        tc.threads = threads;
        const fex::LabeledDataset d = fex::load_csv(te_data);
        const PredictorHandle ph = open_predictor(te_pred, te_bridge);
        const fex::Predictor& p = ph.get();
        if (p.n_features() != d.n_features) {
            throw fex::DimensionError("predictor expects " + std::to_string(p.n_features()) +
                                      " features, dataset has " + std::to_string(d.n_features));
        }

        fex::ExplainerModel g = fex::ExplainerModel::xavier(
            d.n_features, p.n_classes(), parse_hidden(te_hidden),
            fex::derive_seed(tc.seed, 0x65787031ULL));
        fex::ValueModel v = fex::ValueModel::xavier(
            d.n_features, p.n_classes(), parse_hidden(te_value_hidden),
            fex::derive_seed(tc.seed, 0x76616c31ULL));

        fex::TrainingResult result = fex::run_training(d, p, std::move(g), std::move(v), tc);

        json cfg;
        cfg["hidden"] = te_hidden;
        cfg["value_hidden"] = te_value_hidden;
        cfg["epochs"] = tc.epochs;
        cfg["lr"] = tc.lr;
        cfg["batch_size"] = tc.batch_size;
        cfg["trajectory_length"] = tc.trajectory_length;
        cfg["clip_eps"] = tc.clip_eps;
        cfg["lambda_en"] = tc.lambda_en;
        cfg["lambda_v"] = tc.lambda_v;
        cfg["lambda_kl"] = tc.lambda_kl;
        cfg["inner_updates"] = tc.inner_updates;
        cfg["normalize_advantages"] = tc.normalize_advantages;
        cfg["seed"] = tc.seed;
        cfg["data"] = te_data;
        fex::save_explainer_checkpoint(te_out_g, result.explainer, tc.seed, cfg.dump());
        fex::save_value_checkpoint(te_out_v, result.value, tc.seed, cfg.dump());
        if (!te_log.empty()) fex::write_training_log(te_log, result.log);

        json summary;
        summary["out_explainer"] = te_out_g;
        summary["out_value"] = te_out_v;
        summary["batches_logged"] = result.log.size();
        if (!result.log.empty()) {
            summary["final_mean_return"] = result.log.back().mean_return;
        }
        summary["config"] = cfg;
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (*ex) {
        apply_config_file(*ex, ex_config);
        const fex::ExplainerModel g = fex::load_explainer_checkpoint(ex_g);
        const fex::Sample x = load_sample(ex_input, ex_data, ex_row);
        std::size_t cls;
        if (ex_class >= 0) {
            cls = static_cast<std::size_t>(ex_class);
        } else {
            const PredictorHandle ph = open_predictor(ex_pred, ex_bridge);
            cls = static_cast<std::size_t>(ph.get().argmax_class(x));
        }
        const fex::Attribution attr = g.explain(x, cls);

        json doc;
        doc["attribution"] = attr.values;
        doc["normalized"] = attr.normalized;
        doc["class"] = cls;
        doc["n_features"] = attr.size();
        doc["config"] = {{"explainer", ex_g}, {"class", cls}};
        emit(ex_out, doc);
        return 0;
    }

    if (*orc) {
        apply_config_file(*orc, orc_config);
        const PredictorHandle ph = open_predictor(orc_pred, orc_bridge);
        const fex::Predictor& p = ph.get();
        const fex::Sample x = load_sample(orc_input, orc_data, orc_row);
        const std::size_t cls = orc_class >= 0 ? static_cast<std::size_t>(orc_class)
                                               : static_cast<std::size_t>(p.argmax_class(x));
        json doc;
        doc["class"] = cls;
        doc["estimator"] = orc_estimator;
        if (orc_estimator == "exact") {
            const fex::OracleReport rep = fex::empirical_attribution(p, x, cls, orc_cap, threads);
            doc["phi"] = rep.phi.values;
            doc["normalization"] = rep.normalization;
            doc["normalized_phi"] = rep.normalized_phi.values;
            doc["n_masks_evaluated"] = rep.n_masks_evaluated;
        } else if (orc_estimator == "mc") {
            const fex::Attribution phi =
                fex::monte_carlo_attribution(p, x, cls, orc_mc_samples, orc_seed);
            doc["phi"] = phi.values;
            doc["n_samples"] = orc_mc_samples;
            doc["seed"] = orc_seed;
        } else {
            throw fex::ConfigError("unknown estimator '" + orc_estimator + "'");
        }
        doc["config"] = {{"estimator", orc_estimator},
                         {"max_features", orc_cap},
                         {"samples", orc_mc_samples},
                         {"seed", orc_seed}};
        emit(orc_out, doc);
        return 0;
    }

    if (*ev) {
        apply_config_file(*ev, ev_config);
        const fex::ExplainerModel g = fex::load_explainer_checkpoint(ev_g);
        const PredictorHandle ph = open_predictor(ev_pred, ev_bridge);
        const fex::Predictor& p = ph.get();
        const fex::LabeledDataset d = fex::load_csv(ev_data);
        if (g.n_features() != d.n_features) {
            throw fex::DimensionError("explainer expects " + std::to_string(g.n_features()) +
                                      " features, dataset has " + std::to_string(d.n_features));
        }

        const fex::AttributionSource source = [&](const fex::Sample& x, std::size_t k) {
            return g.explain(x, k);
        };
        const fex::BatchAucReport auc = fex::batch_auc(source, p, d, threads);

        json doc;
        doc["positive_auc"] = auc.positive_auc;
        doc["negative_auc"] = auc.negative_auc;
        doc["n_samples"] = auc.n_samples;

        if (!d.ground_truth.empty()) {
            double prec_sum = 0.0;
            std::size_t prec_count = 0;
            for (const fex::Sample& x : d.samples) {
                const int k = p.argmax_class(x);
                const auto it = d.ground_truth.find(k);
                if (it == d.ground_truth.end() || it->second.empty()) continue;
                const fex::Attribution attr = g.explain(x, static_cast<std::size_t>(k));
                prec_sum += fex::recovery_precision(attr, it->second, it->second.size());
                ++prec_count;
            }
            if (prec_count > 0) {
                doc["recovery_precision"] = prec_sum / static_cast<double>(prec_count);
                doc["recovery_samples"] = prec_count;
            }
        }

        if (ev_with_oracle) {
            std::vector<double> spearmans;
            for (const fex::Sample& x : d.samples) {
                const std::size_t k = static_cast<std::size_t>(p.argmax_class(x));
                const fex::OracleReport rep =
                    fex::empirical_attribution(p, x, k, ev_oracle_cap, threads);
                const fex::Attribution attr = g.explain(x, k);
                spearmans.push_back(fex::oracle_agreement(attr, rep).spearman);
            }
            std::sort(spearmans.begin(), spearmans.end());
            doc["oracle_spearman_median"] = spearmans[spearmans.size() / 2];
        }

        if (!ev_curves.empty()) {
            // mean masking curves across the dataset, one row per fraction
            fex::CurveReport mean_pos, mean_neg;
            for (std::size_t i = 0; i < d.samples.size(); ++i) {
                const fex::Sample& x = d.samples[i];
                const std::size_t k = static_cast<std::size_t>(p.argmax_class(x));
                const fex::Attribution attr = g.explain(x, k);
                const auto pos = fex::deletion_curve(attr, p, x, k, fex::MaskOrder::Descending);
                const auto neg = fex::deletion_curve(attr, p, x, k, fex::MaskOrder::Ascending);
                if (i == 0) {
                    mean_pos = pos;
                    mean_neg = neg;
                } else {
                    for (std::size_t j = 0; j < pos.scores.size(); ++j) {
                        mean_pos.scores[j] += pos.scores[j];
                        mean_neg.scores[j] += neg.scores[j];
                    }
                }
            }
            const double inv = 1.0 / static_cast<double>(d.samples.size());
            for (double& s : mean_pos.scores) s *= inv;
            for (double& s : mean_neg.scores) s *= inv;
            fex::write_curve_csv(mean_pos, ev_curves + ".positive.csv");
            fex::write_curve_csv(mean_neg, ev_curves + ".negative.csv");
            doc["curves"] = {ev_curves + ".positive.csv", ev_curves + ".negative.csv"};
        }

        doc["config"] = {{"explainer", ev_g}, {"data", ev_data}};
        emit(ev_out, doc);
        return 0;
    }

    if (*bn) {
        apply_config_file(*bn, bn_config);
        const fex::ExplainerModel g = fex::load_explainer_checkpoint(bn_g);
        const PredictorHandle ph = open_predictor(bn_pred, bn_bridge);
        const fex::LabeledDataset d = fex::load_csv(bn_data);
        const fex::BenchmarkReport rep =
            fex::benchmark_inference(g, ph.get(), d, bn_mc, bn_count);

        json doc;
        doc["explainer_seconds_per_explanation"] = rep.explainer_seconds_per_explanation;
        doc["mc_seconds_per_explanation"] = rep.mc_seconds_per_explanation;
        doc["speedup"] = rep.speedup;
        doc["explainer_predictor_queries"] = rep.explainer_predictor_queries;
        doc["mc_predictor_queries"] = rep.mc_predictor_queries;
        doc["n_explanations"] = rep.n_explanations;
        doc["mc_samples"] = rep.mc_samples;
        doc["config"] = {{"explainer", bn_g}, {"mc_samples", bn_mc},
                         {"explanations", bn_count}};
        emit(bn_out, doc);
        return 0;
    }

    if (*sv) {
        const fex::BuiltinPredictor p = fex::load_predictor_checkpoint(sv_pred);
        fex::serve_bridge(p, std::cin, std::cout);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const fex::FexError& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 70;
    }
}
