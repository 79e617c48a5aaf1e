#include "fex/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace fex {

using nlohmann::json;

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t word = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < len) word |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < len) word |= static_cast<std::uint32_t>(data[i + 2]);
        out.push_back(kB64Alphabet[(word >> 18) & 63]);
        out.push_back(kB64Alphabet[(word >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64Alphabet[(word >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64Alphabet[word & 63] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw ParseError("base64 block length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4] = {0, 0, 0, 0};
        int pads = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=') {
                ++pads;
                vals[j] = 0;
            } else {
                vals[j] = value_of(c);
                if (vals[j] < 0 || pads > 0) throw ParseError("bad base64 character");
            }
        }
        const std::uint32_t word = (static_cast<std::uint32_t>(vals[0]) << 18) |
                                   (static_cast<std::uint32_t>(vals[1]) << 12) |
                                   (static_cast<std::uint32_t>(vals[2]) << 6) |
                                   static_cast<std::uint32_t>(vals[3]);
        out.push_back(static_cast<std::uint8_t>((word >> 16) & 0xff));
        if (pads < 2) out.push_back(static_cast<std::uint8_t>((word >> 8) & 0xff));
        if (pads < 1) out.push_back(static_cast<std::uint8_t>(word & 0xff));
    }
    return out;
}

std::string encode_doubles(const std::vector<double>& values) {
    std::vector<std::uint8_t> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) {
            bytes[i * 8 + static_cast<std::size_t>(b)] =
                static_cast<std::uint8_t>((bits >> (8 * b)) & 0xff);
        }
    }
    return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
    const std::vector<std::uint8_t> bytes = base64_decode(text);
    if (bytes.size() != expected * 8) {
        throw ParseError("parameter block has wrong size");
    }
    std::vector<double> values(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
            bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)])
                    << (8 * b);
        }
        values[i] = std::bit_cast<double>(bits);
    }
    return values;
}

json network_to_json(const nnet::MlpNetwork& net) {
    json arch;
    arch["layer_sizes"] = net.layer_sizes();
    arch["hidden_activation"] = "tanh";
    arch["output_activation"] = nnet::activation_name(net.output_activation());

    json params;
    json weights = json::array();
    json biases = json::array();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        weights.push_back(encode_doubles(net.weights()[l]));
        biases.push_back(encode_doubles(net.biases()[l]));
    }
    params["weights"] = weights;
    params["biases"] = biases;

    json out;
    out["architecture"] = arch;
    out["params"] = params;
    return out;
}

nnet::MlpNetwork network_from_json(const json& j) {
    const auto& arch = j.at("architecture");
    const std::vector<std::size_t> sizes = arch.at("layer_sizes").get<std::vector<std::size_t>>();
    const nnet::Activation act =
        nnet::activation_from_name(arch.at("output_activation").get<std::string>());
    nnet::MlpNetwork net(sizes, act);

    const auto& weights = j.at("params").at("weights");
    const auto& biases = j.at("params").at("biases");
    if (weights.size() != net.layer_count() || biases.size() != net.layer_count()) {
        throw ParseError("checkpoint layer count disagrees with architecture");
    }
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        net.weights()[l] =
            decode_doubles(weights[l].get<std::string>(), net.weights()[l].size());
        net.biases()[l] = decode_doubles(biases[l].get<std::string>(), net.biases()[l].size());
    }
    return net;
}

void write_checkpoint(const std::string& path, const std::string& kind,
                      const nnet::MlpNetwork& net, std::size_t n_features,
                      std::size_t n_classes, std::uint64_t seed,
                      const std::string& config_json) {
    json doc = network_to_json(net);
    doc["format"] = kCheckpointFormat;
    doc["version"] = kCheckpointVersion;
    doc["kind"] = kind;
    doc["architecture"]["n_features"] = n_features;
    doc["architecture"]["n_classes"] = n_classes;
    doc["seed"] = seed;
    json cfg = json::parse(config_json, nullptr, false);
    doc["training_config"] = cfg.is_discarded() ? json::object() : cfg;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("short write to '" + path + "'");
}

json read_checkpoint(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("'" + path + "' is not valid JSON");
    if (doc.value("format", std::string{}) != kCheckpointFormat) {
        throw ParseError("'" + path + "' is not a fex checkpoint");
    }
    if (doc.value("version", 0) != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint version");
    }
    const std::string kind = doc.value("kind", std::string{});
    if (!expected_kind.empty() && kind != expected_kind) {
        throw ParseError("checkpoint kind '" + kind + "', expected '" + expected_kind + "'");
    }
    return doc;
}

} // namespace

void save_predictor_checkpoint(const std::string& path, const BuiltinPredictor& p,
                               std::uint64_t seed, const std::string& config_json) {
    write_checkpoint(path, "predictor", p.network(), p.n_features(), p.n_classes(), seed,
                     config_json);
}

BuiltinPredictor load_predictor_checkpoint(const std::string& path) {
    const json doc = read_checkpoint(path, "predictor");
    nnet::MlpNetwork net = network_from_json(doc);
    return BuiltinPredictor(std::move(net),
                            doc.at("architecture").at("n_classes").get<std::size_t>());
}

void save_explainer_checkpoint(const std::string& path, const ExplainerModel& g,
                               std::uint64_t seed, const std::string& config_json) {
    write_checkpoint(path, "explainer", g.network(), g.n_features(), g.n_classes(), seed,
                     config_json);
}

ExplainerModel load_explainer_checkpoint(const std::string& path) {
    const json doc = read_checkpoint(path, "explainer");
    nnet::MlpNetwork net = network_from_json(doc);
    return ExplainerModel(std::move(net),
                          doc.at("architecture").at("n_features").get<std::size_t>(),
                          doc.at("architecture").at("n_classes").get<std::size_t>());
}

void save_value_checkpoint(const std::string& path, const ValueModel& v, std::uint64_t seed,
                           const std::string& config_json) {
    write_checkpoint(path, "value", v.network(), v.network().input_size(), v.n_classes(),
                     seed, config_json);
}

ValueModel load_value_checkpoint(const std::string& path) {
    const json doc = read_checkpoint(path, "value");
    nnet::MlpNetwork net = network_from_json(doc);
    return ValueModel(std::move(net),
                      doc.at("architecture").at("n_classes").get<std::size_t>());
}

std::string checkpoint_kind(const std::string& path) {
    const json doc = read_checkpoint(path, "");
    return doc.value("kind", std::string{});
}

} // namespace fex
