#pragma once

#include <cstddef>
#include <vector>

#include "nodelab/graph.hpp"

namespace nodelab {

// Row-major n x d_in matrix; row v holds the input features of node v.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

inline constexpr double kFeatureFrequencyBase = 10000.0;

/// Sinusoidal degree encoding, one row per node:
///   [sin(x / w_0), cos(x / w_0), ..., sin(x / w_{d/2-1}), cos(x / w_{d/2-1})]
/// with x = degree(v) (minus the mean degree when `subtract_mean`) and
/// w_i = 10000^(2i / d_in). Throws ParameterError unless d_in is even and >= 2.
FeatureMatrix degree_features(const Graph& g, int d_in, bool subtract_mean);

}  // namespace nodelab
