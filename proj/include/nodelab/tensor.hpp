#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nodelab/graph.hpp"

namespace nodelab {

/// Dense row-major matrix of doubles. Vectors are 1 x n, scalars 1 x 1.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    // Throws ShapeError when values.size() != rows * cols.
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Tensor scalar(double v) { return Tensor(1, 1, v); }
    static Tensor row(std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    std::string shape_string() const;
    bool same_shape(const Tensor& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    const double& operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const double& operator[](std::size_t i) const { return values_[i]; }
    double item() const;  // the single entry of a 1 x 1 tensor

    std::span<double> row_span(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row_span(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool all_finite() const noexcept;
    bool operator==(const Tensor&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Thread-local instrumentation: floating-point arithmetic and comparisons
/// performed by the kernels below (and by code that reports through
/// count_arithmetic / count_comparisons).
struct OperationCounts {
    std::uint64_t arithmetic = 0;
    std::uint64_t comparisons = 0;
};
OperationCounts operation_counts();
void reset_operation_counts();
void count_arithmetic(std::uint64_t n);
void count_comparisons(std::uint64_t n);

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Forward kernels. All shapes must conform exactly (ShapeError names both
// shapes); the only broadcast is the explicit `scale`.
Tensor matmul(const Tensor& a, const Tensor& b);     // a (m x k) * b (k x c)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a (m x k) * b^T, b is c x k
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T * b, a is k x m, b is k x c
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor leaky_relu(const Tensor& a);
Tensor tanh(const Tensor& a);
// Throws DomainError on any entry <= 0.
Tensor log(const Tensor& a);
// Softmax over all entries; entries with excluded[i] != 0 get exactly 0 and
// never enter the max or the normalizer. Throws UsageError if all excluded.
Tensor masked_softmax(const Tensor& a, std::span<const std::uint8_t> excluded);
// Column-wise max over rows -> 1 x cols; argmax ties go to the first row.
Tensor max_rows(const Tensor& a, std::vector<std::size_t>* argmax = nullptr);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor sum(const Tensor& a);
Tensor element(const Tensor& a, std::size_t r, std::size_t c);

struct BatchStatistics {
    Tensor mean;      // 1 x c
    Tensor variance;  // 1 x c, biased
};
// Normalizes each column with the batch mean and biased variance.
Tensor batch_norm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        BatchStatistics* stats = nullptr);
Tensor batch_norm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& running_mean,
                       const Tensor& running_var);
// running <- (1 - momentum) running + momentum batch, with the unbiased
// variance (n / (n - 1)) for the running variance when n > 1.
void update_running_statistics(Tensor& running_mean, Tensor& running_var, const BatchStatistics& stats,
                               std::size_t batch_rows);

/// One additive attention head over N(v) + {v}:
///   e_vu = leaky_relu(a[:h] . z_v + a[h:] . z_u),  alpha_v = softmax_u(e_v),
///   out_v = sum_u alpha_vu z_u
/// z is n x h and a is 1 x 2h. Each neighborhood is visited in a canonical
/// order (lexicographic on the rows of z), so relabeling the graph permutes
/// the output rows bitwise.
struct AttentionCache {
    std::vector<std::size_t> offsets;  // per node, into the flat arrays
    std::vector<NodeId> order;         // neighborhood members, canonical order
    std::vector<double> alpha;
    std::vector<double> logits;        // pre-activation
};
Tensor graph_attention(const Tensor& z, const Tensor& a, const Graph& g, AttentionCache* cache = nullptr);

}  // namespace nodelab
