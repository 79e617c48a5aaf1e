#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "fex/oracle.hpp"
#include "fex/synthdata.hpp"
#include "helpers.hpp"

using namespace fex;
using fex::testing::TempDir;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("gen_planted: label balance near 0.5 at threshold 0.5, k=1") {
    const LabeledDataset d = gen_planted(10000, 8, 1, 0.5, 42);
    std::size_t ones = 0;
    for (const Sample& s : d.samples) ones += static_cast<std::size_t>(*s.label);
    const double frac = static_cast<double>(ones) / 10000.0;
    CHECK(frac >= 0.45);
    CHECK(frac <= 0.55);
}

TEST_CASE("gen_planted: threshold 0 labels everything 1") {
    const LabeledDataset d = gen_planted(500, 5, 2, 0.0, 9);
    for (const Sample& s : d.samples) CHECK(*s.label == 1);
}

TEST_CASE("gen_planted: same seed gives identical dataset bytes") {
    TempDir tmp;
    save_csv(gen_planted(200, 6, 1, 0.5, 31), tmp.file("a.csv"));
    save_csv(gen_planted(200, 6, 1, 0.5, 31), tmp.file("b.csv"));
    CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
    CHECK(slurp(tmp.file("a.csv.meta.json")) == slurp(tmp.file("b.csv.meta.json")));
    save_csv(gen_planted(200, 6, 1, 0.5, 32), tmp.file("c.csv"));
    CHECK(slurp(tmp.file("a.csv")) != slurp(tmp.file("c.csv")));
}

TEST_CASE("gen_planted: labels follow the recorded ground truth") {
    const LabeledDataset d = gen_planted(300, 7, 3, 0.4, 77);
    const auto& planted = d.ground_truth.at(1);
    REQUIRE(planted.size() == 3);
    for (const Sample& s : d.samples) {
        double mean = 0.0;
        for (std::size_t i : planted) mean += s.features[i];
        mean /= 3.0;
        CHECK(*s.label == (mean > 0.4 ? 1 : 0));
    }
}

TEST_CASE("gen_two_class_disjoint: sets are disjoint and drive the labels") {
    for (std::uint64_t seed : {0ULL, 5ULL, 123ULL}) {
        const LabeledDataset d = gen_two_class_disjoint(400, 9, seed);
        const auto& s0 = d.ground_truth.at(0);
        const auto& s1 = d.ground_truth.at(1);
        REQUIRE(s0.size() == 2);
        REQUIRE(s1.size() == 2);
        for (std::size_t i : s0) CHECK(s1.count(i) == 0);

        auto mean_of = [](const Sample& s, const std::set<std::size_t>& idx) {
            double acc = 0.0;
            for (std::size_t i : idx) acc += s.features[i];
            return acc / static_cast<double>(idx.size());
        };
        for (const Sample& s : d.samples) {
            const int expect = mean_of(s, s0) > mean_of(s, s1) ? 0 : 1;
            CHECK(*s.label == expect);
            // swapping the two evidence sets flips every label
            const int swapped = mean_of(s, s1) > mean_of(s, s0) ? 0 : 1;
            if (mean_of(s, s0) != mean_of(s, s1)) CHECK(swapped == 1 - expect);
        }
    }
}

TEST_CASE("gen_two_class_disjoint rejects tiny feature spaces") {
    CHECK_THROWS_AS(gen_two_class_disjoint(10, 3, 0), ConfigError);
}

TEST_CASE("csv round-trip preserves data and metadata") {
    TempDir tmp;
    const LabeledDataset d = gen_planted(150, 5, 2, 0.45, 8);
    const std::string path = tmp.file("rt.csv");
    save_csv(d, path);
    const LabeledDataset back = load_csv(path);

    REQUIRE(back.samples.size() == d.samples.size());
    CHECK(back.n_features == d.n_features);
    CHECK(back.n_classes == d.n_classes);
    CHECK(back.ground_truth == d.ground_truth);
    CHECK(back.task == d.task);
    CHECK(back.seed == d.seed);
    CHECK(back.threshold == d.threshold);
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        CHECK(back.samples[i].features == d.samples[i].features); // bit-exact floats
        CHECK(back.samples[i].label == d.samples[i].label);
    }
}

TEST_CASE("load_csv: empty row reported at its line number") {
    TempDir tmp;
    const std::string path = tmp.file("bad.csv");
    std::ofstream(path) << "f0,f1,label\n\n0.5,0.5,1\n";
    try {
        load_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("load_csv: header/row width mismatch is a parse error") {
    TempDir tmp;
    const std::string path = tmp.file("bad2.csv");
    std::ofstream(path) << "f0,f1,label\n0.5,0.25,0.125,1\n";
    try {
        load_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("load_csv: malformed header rejected") {
    TempDir tmp;
    const std::string path = tmp.file("bad3.csv");
    std::ofstream(path) << "a,b,c\n1,2,0\n";
    CHECK_THROWS_AS(load_csv(path), ParseError);
}

TEST_CASE("planted ground truth is the oracle argmax for a threshold predictor") {
    // Bayes-style predictor for planted-1: class 1 iff the planted feature
    // value exceeds the threshold (smoothed slightly so A(x) > 0)
    const LabeledDataset d = gen_planted(60, 7, 1, 0.5, 21);
    const std::size_t j = *d.ground_truth.at(1).begin();
    const auto bayes = fex::testing::scalar_predictor(7, [j](const Sample& x) {
        return x.features[j] > 0.5 ? 0.99 : 0.01;
    });

    std::size_t checked = 0;
    for (const Sample& s : d.samples) {
        if (*s.label != 1) continue;
        const OracleReport rep = empirical_attribution(bayes, s, 1);
        std::size_t best = 0;
        for (std::size_t i = 1; i < rep.phi.size(); ++i) {
            if (rep.phi.values[i] > rep.phi.values[best]) best = i;
        }
        CHECK(best == j);
        ++checked;
    }
    CHECK(checked > 10);
}
