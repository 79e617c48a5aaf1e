#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <system_error>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fex/mask_ops.hpp"
#include "fex/predictor.hpp"
#include "fex/types.hpp"

namespace fex::testing {

/// Binary predictor from a scalar function s(x) in [0,1]: probs = (1-s, s).
inline FunctionPredictor scalar_predictor(std::size_t n_features,
                                          std::function<double(const Sample&)> score) {
    return FunctionPredictor(n_features, 2, [score](const Sample& x) {
        const double s = score(x);
        return ProbVector({1.0 - s, s});
    });
}

/// Predictor with constant probability vector.
inline FunctionPredictor constant_predictor(std::size_t n_features,
                                            std::vector<double> probs) {
    return FunctionPredictor(n_features, probs.size(),
                             [probs](const Sample&) { return ProbVector(probs); });
}

/// Temporary directory cleaned up on destruction.
class TempDir {
public:
    TempDir() {
        char templ[] = "/tmp/fex_test_XXXXXX";
        const char* got = ::mkdtemp(templ);
        path_ = got ? got : "/tmp";
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return path_ + "/" + name; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace fex::testing
