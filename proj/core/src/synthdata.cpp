#include "fex/synthdata.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fex/rng.hpp"
#include "json.hpp"

namespace fex {

namespace {

std::vector<std::size_t> sample_distinct_indices(std::size_t k, std::size_t n, Rng& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

double subset_mean(const Sample& s, const std::set<std::size_t>& idx) {
    double acc = 0.0;
    for (std::size_t i : idx) acc += s.features[i];
    return acc / static_cast<double>(idx.size());
}

std::string shortest_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ParseError("bad float '" + tok + "'", line);
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

LabeledDataset gen_planted(std::size_t n_samples, std::size_t n_features,
                           std::size_t k_informative, double threshold,
                           std::uint64_t seed) {
    if (k_informative < 1 || k_informative > n_features) {
        throw ConfigError("k_informative must lie in [1, n_features]");
    }
    Rng rng(derive_seed(seed, 0x706c616e74ULL));
    LabeledDataset d;
    d.n_features = n_features;
    d.n_classes = 2;
    d.task = "planted";
    d.seed = seed;
    d.threshold = threshold;

    const auto planted = sample_distinct_indices(k_informative, n_features, rng);
    std::set<std::size_t> planted_set(planted.begin(), planted.end());
    // high planted values are evidence FOR class 1; under zero-masking
    // attribution class 0 has no concentrated evidence set, so only class 1
    // gets a ground truth
    d.ground_truth[1] = planted_set;

    d.samples.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        Sample x;
        x.features.resize(n_features);
        for (std::size_t i = 0; i < n_features; ++i) x.features[i] = rng.uniform01();
        x.label = subset_mean(x, planted_set) > threshold ? 1 : 0;
        d.samples.push_back(std::move(x));
    }
    return d;
}

LabeledDataset gen_two_class_disjoint(std::size_t n_samples, std::size_t n_features,
                                      std::uint64_t seed) {
    if (n_features < 4) {
        throw ConfigError("two-class disjoint task needs n_features >= 4");
    }
    Rng rng(derive_seed(seed, 0x64697375ULL));
    LabeledDataset d;
    d.n_features = n_features;
    d.n_classes = 2;
    d.task = "two-class-disjoint";
    d.seed = seed;

    const auto idx = sample_distinct_indices(4, n_features, rng);
    d.ground_truth[0] = {idx[0], idx[1]};
    d.ground_truth[1] = {idx[2], idx[3]};

    d.samples.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        Sample x;
        x.features.resize(n_features);
        for (std::size_t i = 0; i < n_features; ++i) x.features[i] = rng.uniform01();
        x.label = subset_mean(x, d.ground_truth[0]) > subset_mean(x, d.ground_truth[1]) ? 0 : 1;
        d.samples.push_back(std::move(x));
    }
    return d;
}

void save_csv(const LabeledDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    for (std::size_t i = 0; i < data.n_features; ++i) out << "f" << i << ",";
    out << "label\n";
    for (const Sample& s : data.samples) {
        if (s.features.size() != data.n_features) {
            throw DimensionError("sample width differs from dataset n_features");
        }
        if (!s.label) throw IoError("cannot save unlabeled sample to CSV");
        for (double v : s.features) out << shortest_double(v) << ",";
        out << *s.label << "\n";
    }
    if (!out) throw IoError("short write to '" + path + "'");
    out.close();

    nlohmann::json meta;
    meta["n_features"] = data.n_features;
    meta["n_classes"] = data.n_classes;
    meta["task"] = data.task;
    meta["seed"] = data.seed;
    meta["threshold"] = data.threshold;
    nlohmann::json gt = nlohmann::json::object();
    for (const auto& [cls, feats] : data.ground_truth) {
        gt[std::to_string(cls)] = std::vector<std::size_t>(feats.begin(), feats.end());
    }
    meta["ground_truth"] = gt;

    std::ofstream mout(path + ".meta.json", std::ios::binary);
    if (!mout) throw IoError("cannot open '" + path + ".meta.json' for writing");
    mout << meta.dump(2) << "\n";
}

LabeledDataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    LabeledDataset d;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("empty CSV file", 1);
    line_no = 1;
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "label") {
        throw ParseError("header must be f0,...,label", 1);
    }
    d.n_features = header.size() - 1;
    for (std::size_t i = 0; i < d.n_features; ++i) {
        if (header[i] != "f" + std::to_string(i)) {
            throw ParseError("unexpected header column '" + header[i] + "'", 1);
        }
    }

    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = split_csv_line(line);
        if (tok.size() == 1 && tok[0].empty()) {
            throw ParseError("empty row", line_no);
        }
        if (tok.size() != d.n_features + 1) {
            throw ParseError("row has " + std::to_string(tok.size()) + " fields, expected " +
                                 std::to_string(d.n_features + 1),
                             line_no);
        }
        Sample s;
        s.features.resize(d.n_features);
        for (std::size_t i = 0; i < d.n_features; ++i) {
            s.features[i] = parse_double(tok[i], line_no);
        }
        int label = 0;
        const auto& lt = tok.back();
        const auto res = std::from_chars(lt.data(), lt.data() + lt.size(), label);
        if (res.ec != std::errc{} || res.ptr != lt.data() + lt.size()) {
            throw ParseError("bad label '" + lt + "'", line_no);
        }
        s.label = label;
        max_label = std::max(max_label, label);
        d.samples.push_back(std::move(s));
    }

    std::ifstream min(path + ".meta.json", std::ios::binary);
    if (min) {
        nlohmann::json meta;
        try {
            min >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad metadata sidecar: ") + e.what());
        }
        d.n_classes = meta.value("n_classes", std::size_t{0});
        d.task = meta.value("task", std::string{});
        d.seed = meta.value("seed", std::uint64_t{0});
        d.threshold = meta.value("threshold", 0.0);
        if (meta.contains("ground_truth")) {
            for (const auto& [key, val] : meta["ground_truth"].items()) {
                std::set<std::size_t> feats;
                for (const auto& f : val) feats.insert(f.get<std::size_t>());
                d.ground_truth[std::stoi(key)] = std::move(feats);
            }
        }
        const auto meta_n = meta.value("n_features", d.n_features);
        if (meta_n != d.n_features) {
            throw ParseError("metadata n_features disagrees with CSV header");
        }
    } else {
        d.n_classes = static_cast<std::size_t>(max_label + 1);
    }
    if (d.n_classes == 0) d.n_classes = static_cast<std::size_t>(max_label + 1);
    return d;
}

} // namespace fex
