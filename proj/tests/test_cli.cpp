#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fex/bridge.hpp"
#include "fex/checkpoint.hpp"
#include "fex/nnet.hpp"
#include "fex/predictor.hpp"
#include "fex/synthdata.hpp"
#include "fex/trainer.hpp"
#include "helpers.hpp"

using namespace fex;
using fex::testing::TempDir;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const TempDir& tmp, const std::string& args) {
    const std::string out_path = tmp.file("cli_stdout.txt");
    const std::string err_path = tmp.file("cli_stderr.txt");
    const std::string cmd = std::string(FEX_CLI_PATH) + " " + args + " >" + out_path +
                            " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    CliResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out_path);
    res.err = slurp(err_path);
    return res;
}

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    REQUIRE(!j.is_discarded());
    return j;
}

} // namespace

TEST_CASE("oracle subcommand reproduces the constant-predictor attribution") {
    TempDir tmp;
    std::ofstream(tmp.file("sample.json")) << "{\"features\": [0.4, 0.9]}\n";
    // a black-box bridge with f identically 1 for class 0
    const std::string bridge =
        "\"python3 " FEX_TEST_BRIDGE_DIR "/constant_bridge.py 1.0 0.0\"";
    const CliResult res = run_cli(
        tmp, "oracle --bridge " + bridge + " --input " + tmp.file("sample.json") +
                 " --class 0");
    REQUIRE(res.exit_code == 0);
    const json doc = parse_json(res.out);
    CHECK(doc["phi"][0].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(doc["phi"][1].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(doc["normalization"].get<double>() == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(doc["n_masks_evaluated"].get<int>() == 3);
}

TEST_CASE("explain on a zero-weight explainer yields all 0.5") {
    TempDir tmp;
    const ExplainerModel g(nnet::MlpNetwork({3, 6}, nnet::Activation::Sigmoid), 3, 2);
    save_explainer_checkpoint(tmp.file("g.ckpt"), g, 0);
    std::ofstream(tmp.file("x.json")) << "[0.2, 0.4, 0.6]\n";

    const CliResult res = run_cli(tmp, "explain --explainer " + tmp.file("g.ckpt") +
                                           " --input " + tmp.file("x.json") +
                                           " --class 1");
    REQUIRE(res.exit_code == 0);
    const json doc = parse_json(res.out);
    for (const auto& v : doc["attribution"]) {
        CHECK(v.get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(doc["class"].get<int>() == 1);
}

TEST_CASE("checkpoint round-trip preserves forward outputs bit-exactly") {
    TempDir tmp;
    const LabeledDataset d = gen_planted(200, 5, 1, 0.5, 4);
    PredictorTrainOptions opts;
    opts.epochs = 8;
    opts.seed = 19;
    const BuiltinPredictor p = train_builtin(d, opts);
    save_predictor_checkpoint(tmp.file("p.ckpt"), p, opts.seed);
    const BuiltinPredictor q = load_predictor_checkpoint(tmp.file("p.ckpt"));
    for (int i = 0; i < 20; ++i) {
        const ProbVector a = p.predict_proba(d.samples[i]);
        const ProbVector b = q.predict_proba(d.samples[i]);
        CHECK(a.probs == b.probs);
    }
    CHECK(checkpoint_kind(tmp.file("p.ckpt")) == "predictor");
}

TEST_CASE("serve-bridge loopback equals in-process prediction") {
    TempDir tmp;
    const LabeledDataset d = gen_planted(50, 4, 1, 0.5, 6);
    PredictorTrainOptions opts;
    opts.epochs = 5;
    opts.seed = 7;
    const BuiltinPredictor p = train_builtin(d, opts);
    save_predictor_checkpoint(tmp.file("p.ckpt"), p, opts.seed);

    const auto bridge = open_blackbox_bridge(std::string(FEX_CLI_PATH) +
                                             " serve-bridge --predictor " +
                                             tmp.file("p.ckpt"));
    CHECK(bridge->n_features() == 4);
    CHECK(bridge->n_classes() == 2);
    for (int i = 0; i < 10; ++i) {
        const ProbVector a = p.predict_proba(d.samples[i]);
        const ProbVector b = bridge->predict_proba(d.samples[i]);
        CHECK(a.probs == b.probs); // shortest-round-trip JSON keeps doubles exact
    }
}

TEST_CASE("gen-data then train-predictor then train-explainer then eval") {
    TempDir tmp;
    const std::string data = tmp.file("train.csv");
    const std::string held = tmp.file("held.csv");

    CliResult res = run_cli(tmp,
        "gen-data --task planted --samples 1200 --features 10 --informative 1 "
        "--threshold 0.5 --seed 21 --out " + data);
    REQUIRE(res.exit_code == 0);

    res = run_cli(tmp,
        "gen-data --task planted --samples 120 --features 10 --informative 1 "
        "--threshold 0.5 --seed 21 --out " + held);
    REQUIRE(res.exit_code == 0);

    res = run_cli(tmp, "train-predictor --data " + data +
                           " --epochs 30 --seed 3 --out " + tmp.file("p.ckpt"));
    REQUIRE(res.exit_code == 0);
    CHECK(parse_json(res.out)["train_accuracy"].get<double>() >= 0.95);

    res = run_cli(tmp, "--threads 2 train-explainer --data " + data +
                           " --predictor " + tmp.file("p.ckpt") +
                           " --epochs 12 --batch-size 64 --seed 5" +
                           " --out-explainer " + tmp.file("g.ckpt") +
                           " --out-value " + tmp.file("v.ckpt") +
                           " --log " + tmp.file("train.ndjson"));
    REQUIRE(res.exit_code == 0);

    // training log is well-formed ndjson with the documented keys
    std::ifstream log(tmp.file("train.ndjson"));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(log, line)) {
        const json rec = parse_json(line);
        for (const char* key :
             {"epoch", "batch", "mean_return", "surrogate", "value_loss", "kl", "entropy"}) {
            CHECK(rec.contains(key));
        }
        ++lines;
    }
    CHECK(lines > 0);

    res = run_cli(tmp, "eval --explainer " + tmp.file("g.ckpt") + " --predictor " +
                           tmp.file("p.ckpt") + " --data " + held + " --curves " +
                           tmp.file("curves") + " --out " + tmp.file("eval.json"));
    REQUIRE(res.exit_code == 0);
    const json rep = parse_json(slurp(tmp.file("eval.json")));
    CHECK(rep["n_samples"].get<int>() == 120);
    CHECK(rep.contains("recovery_precision"));
    CHECK(rep["recovery_precision"].get<double>() >= 0.9);
    CHECK(rep["positive_auc"].get<double>() < rep["negative_auc"].get<double>());

    // curve CSVs exist and carry the header
    CHECK(slurp(tmp.file("curves.positive.csv")).rfind("fraction,score", 0) == 0);
    CHECK(slurp(tmp.file("curves.negative.csv")).rfind("fraction,score", 0) == 0);
}

TEST_CASE("every command is deterministic under --seed") {
    TempDir tmp;
    const std::string data = tmp.file("d.csv");
    REQUIRE(run_cli(tmp, "gen-data --samples 300 --features 6 --seed 9 --out " + data)
                .exit_code == 0);
    const std::string csv_once = slurp(data);
    REQUIRE(run_cli(tmp, "gen-data --samples 300 --features 6 --seed 9 --out " + data)
                .exit_code == 0);
    CHECK(slurp(data) == csv_once);

    REQUIRE(run_cli(tmp, "train-predictor --data " + data + " --epochs 6 --seed 2 --out " +
                             tmp.file("p1.ckpt")).exit_code == 0);
    REQUIRE(run_cli(tmp, "train-predictor --data " + data + " --epochs 6 --seed 2 --out " +
                             tmp.file("p2.ckpt")).exit_code == 0);
    CHECK(slurp(tmp.file("p1.ckpt")) == slurp(tmp.file("p2.ckpt")));

    REQUIRE(run_cli(tmp, "--threads 1 train-explainer --data " + data + " --predictor " +
                             tmp.file("p1.ckpt") + " --epochs 2 --seed 4 --out-explainer " +
                             tmp.file("g1.ckpt") + " --out-value " + tmp.file("v1.ckpt"))
                .exit_code == 0);
    REQUIRE(run_cli(tmp, "--threads 2 train-explainer --data " + data + " --predictor " +
                             tmp.file("p1.ckpt") + " --epochs 2 --seed 4 --out-explainer " +
                             tmp.file("g2.ckpt") + " --out-value " + tmp.file("v2.ckpt"))
                .exit_code == 0);
    // identical across runs and across thread counts
    CHECK(slurp(tmp.file("g1.ckpt")) == slurp(tmp.file("g2.ckpt")));
    CHECK(slurp(tmp.file("v1.ckpt")) == slurp(tmp.file("v2.ckpt")));
}

TEST_CASE("config file values yield to explicit flags") {
    TempDir tmp;
    const std::string data = tmp.file("d.csv");
    REQUIRE(run_cli(tmp, "gen-data --samples 100 --features 4 --seed 1 --out " + data)
                .exit_code == 0);
    std::ofstream(tmp.file("cfg.json")) << "{\"epochs\": 3, \"seed\": 11}\n";

    // config supplies epochs and seed
    CliResult res = run_cli(tmp, "train-predictor --data " + data + " --config " +
                                     tmp.file("cfg.json") + " --out " + tmp.file("a.ckpt"));
    REQUIRE(res.exit_code == 0);
    json cfg = parse_json(res.out)["config"];
    CHECK(cfg["epochs"].get<int>() == 3);
    CHECK(cfg["seed"].get<int>() == 11);

    // explicit flag overrides the config file
    res = run_cli(tmp, "train-predictor --data " + data + " --config " +
                           tmp.file("cfg.json") + " --epochs 5 --out " + tmp.file("b.ckpt"));
    REQUIRE(res.exit_code == 0);
    cfg = parse_json(res.out)["config"];
    CHECK(cfg["epochs"].get<int>() == 5);
    CHECK(cfg["seed"].get<int>() == 11);
}

TEST_CASE("error reporting is one machine-parsable line") {
    TempDir tmp;
    SUBCASE("missing file -> io category") {
        const CliResult res = run_cli(tmp, "train-predictor --data /nonexistent.csv --out x");
        CHECK(res.exit_code != 0);
        CHECK(res.err.rfind("error: io:", 0) == 0);
    }
    SUBCASE("unknown flag -> usage category") {
        const CliResult res = run_cli(tmp, "gen-data --bogus 1 --out x.csv");
        CHECK(res.exit_code != 0);
        CHECK(res.err.rfind("error: usage:", 0) == 0);
    }
    SUBCASE("dimension mismatch between checkpoint and data") {
        const std::string d4 = tmp.file("d4.csv");
        const std::string d6 = tmp.file("d6.csv");
        REQUIRE(run_cli(tmp, "gen-data --samples 60 --features 4 --seed 1 --out " + d4)
                    .exit_code == 0);
        REQUIRE(run_cli(tmp, "gen-data --samples 60 --features 6 --seed 1 --out " + d6)
                    .exit_code == 0);
        REQUIRE(run_cli(tmp, "train-predictor --data " + d4 + " --epochs 1 --out " +
                                 tmp.file("p.ckpt")).exit_code == 0);
        const CliResult res =
            run_cli(tmp, "train-explainer --data " + d6 + " --predictor " +
                             tmp.file("p.ckpt") + " --epochs 1 --out-explainer " +
                             tmp.file("g.ckpt") + " --out-value " + tmp.file("v.ckpt"));
        CHECK(res.exit_code != 0);
        CHECK(res.err.rfind("error: dimension:", 0) == 0);
    }
    SUBCASE("malformed csv -> parse category with a line number") {
        std::ofstream(tmp.file("bad.csv")) << "f0,f1,label\n\n";
        const CliResult res = run_cli(tmp, "train-predictor --data " + tmp.file("bad.csv") +
                                               " --out " + tmp.file("p.ckpt"));
        CHECK(res.exit_code != 0);
        CHECK(res.err.rfind("error: parse:", 0) == 0);
        CHECK(res.err.find("line 2") != std::string::npos);
    }
}

TEST_CASE("oracle mc estimator via the command line") {
    TempDir tmp;
    std::ofstream(tmp.file("sample.json")) << "{\"features\": [0.4, 0.9]}\n";
    const std::string bridge =
        "\"python3 " FEX_TEST_BRIDGE_DIR "/constant_bridge.py 1.0 0.0\"";
    const CliResult res = run_cli(
        tmp, "oracle --bridge " + bridge + " --input " + tmp.file("sample.json") +
                 " --class 0 --estimator mc --samples 4000 --seed 5");
    REQUIRE(res.exit_code == 0);
    const json doc = parse_json(res.out);
    CHECK(doc["phi"][0].get<double>() == doctest::Approx(1.5).epsilon(0.08));
    CHECK(doc["phi"][1].get<double>() == doctest::Approx(1.5).epsilon(0.08));
}

TEST_CASE("bench subcommand reports query counts and speedup") {
    TempDir tmp;
    const std::string data = tmp.file("d.csv");
    REQUIRE(run_cli(tmp, "gen-data --samples 50 --features 8 --seed 2 --out " + data)
                .exit_code == 0);
    REQUIRE(run_cli(tmp, "train-predictor --data " + data + " --epochs 2 --out " +
                             tmp.file("p.ckpt")).exit_code == 0);
    REQUIRE(run_cli(tmp, "train-explainer --data " + data + " --predictor " +
                             tmp.file("p.ckpt") + " --epochs 1 --out-explainer " +
                             tmp.file("g.ckpt") + " --out-value " + tmp.file("v.ckpt"))
                .exit_code == 0);
    const CliResult res =
        run_cli(tmp, "bench --explainer " + tmp.file("g.ckpt") + " --predictor " +
                         tmp.file("p.ckpt") + " --data " + data +
                         " --mc-samples 20 --explanations 50");
    REQUIRE(res.exit_code == 0);
    const json doc = parse_json(res.out);
    CHECK(doc["explainer_predictor_queries"].get<int>() == 0);
    CHECK(doc["mc_predictor_queries"].get<int>() == 20 * 50);
    CHECK(doc["speedup"].get<double>() > 0.0);
}
