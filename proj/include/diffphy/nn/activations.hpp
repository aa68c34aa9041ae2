#pragma once

#include <cmath>

namespace diffphy::nn {

enum class HiddenActivation { Softplus, Relu };
enum class OutputActivation { Linear, Softmax };

/// softplus(x) = ln(1 + e^x), evaluated without overflow for large |x|.
inline double softplus(double x) {
    return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

/// d/dx softplus(x) = logistic sigmoid.
inline double softplus_grad(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

}  // namespace diffphy::nn
