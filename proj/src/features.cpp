#include "nodelab/features.hpp"

#include <cmath>

#include "nodelab/errors.hpp"

namespace nodelab {

FeatureMatrix degree_features(const Graph& g, int d_in, bool subtract_mean) {
    if (d_in < 2 || d_in % 2 != 0) throw ParameterError("feature dimension must be even and >= 2");
    const int n = g.node_count();
    FeatureMatrix x{static_cast<std::size_t>(n), static_cast<std::size_t>(d_in), {}};
    x.values.resize(x.rows * x.cols);
    const double shift = subtract_mean ? g.mean_degree() : 0.0;
    std::vector<double> inv_freq(static_cast<std::size_t>(d_in / 2));
    for (int i = 0; i < d_in / 2; ++i)
        inv_freq[i] = 1.0 / std::pow(kFeatureFrequencyBase, 2.0 * i / d_in);
    for (int v = 0; v < n; ++v) {
        const double deg = g.degree(v) - shift;
        double* row = x.values.data() + static_cast<std::size_t>(v) * x.cols;
        for (int i = 0; i < d_in / 2; ++i) {
            row[2 * i] = std::sin(deg * inv_freq[i]);
            row[2 * i + 1] = std::cos(deg * inv_freq[i]);
        }
    }
    return x;
}

}  // namespace nodelab
