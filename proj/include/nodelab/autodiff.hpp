#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nodelab/tensor.hpp"

namespace nodelab {

class Tape;

// Handle to one recorded value on a tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

/// Records every operation in execution order (which is a topological order),
/// each with its parent ids and backward rule. backward() walks the records in
/// reverse and sums the contributions of all consumers into each node's
/// gradient. A tape is owned by one thread.
class Tape {
public:
    using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

    Var constant(Tensor value);
    Var variable(Tensor value);

    const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

    // Used by op implementations. The node requires a gradient when any
    // parent does; otherwise the backward rule is dropped.
    Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);
    Var record(Tensor value, std::span<const Var> parents, Backward backward);

    // Adds `g` into the gradient of `v` (no-op for constants).
    void accumulate(Var v, const Tensor& g);

    // Reverse pass from a 1 x 1 loss on this tape. Throws UsageError otherwise.
    void backward(Var loss);

    // Gradient after backward(); zeros for nodes the loss does not reach.
    Tensor gradient(Var v) const;

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        Backward backward;
    };
    std::vector<Node> nodes_;
};

// Differentiable counterparts of the tensor kernels; forward values are
// produced by the same kernels, so they match untaped evaluation bitwise.
Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var leaky_relu(Var a);
Var tanh(Var a);
Var log(Var a);
Var masked_softmax(Var a, std::span<const std::uint8_t> excluded);
Var max_rows(Var a);
Var gather_rows(Var a, std::span<const std::size_t> rows);
Var sum(Var a);
Var element(Var a, std::size_t r, std::size_t c);
Var batch_norm_train(Var x, Var gamma, Var beta, BatchStatistics* stats = nullptr);
Var batch_norm_eval(Var x, Var gamma, Var beta, const Tensor& running_mean, const Tensor& running_var);
Var graph_attention(Var z, Var a, const Graph& g);

// Entry (row, col) of some earlier value.
struct EntryRef {
    Var source;
    std::size_t row = 0;
    std::size_t col = 0;
};
// 1 x n row assembled from individual entries of (possibly different) values;
// missing entries are 0 and receive no gradient.
Var stitch(Tape& tape, std::span<const std::optional<EntryRef>> entries);

struct GradientCheckOptions {
    double step = 1e-5;
    // Coordinates checked; 0 checks all, otherwise a seeded random subset.
    std::size_t max_coordinates = 0;
    std::uint64_t seed = 0;
};

using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

/// Compares the tape gradient of f at `params` with central differences and
/// returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Throws DomainError when f yields a non-finite value.
double gradient_check(const ScalarFunction& f, const std::vector<Tensor>& params,
                      const GradientCheckOptions& options = {});

}  // namespace nodelab
