#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "fixtures.hpp"
#include "nodelab/autodiff.hpp"
#include "tensor_helpers.hpp"

namespace fixtures {

struct Shape {
    std::size_t r, c;
};

inline constexpr Shape kSweepShapes[10] = {{1, 1}, {1, 5}, {2, 3}, {3, 2}, {4, 4},
                                           {5, 1}, {2, 7}, {6, 3}, {3, 8}, {7, 5}};

/// Randomized gradient check of every differentiable op at one shape; returns
/// the worst relative error. `seed` selects the random inputs.
inline double op_gradient_sweep(const Shape& s, std::uint64_t seed, nodelab::Rng& rng) {
    using namespace nodelab;
    auto check = [](const ScalarFunction& f, const std::vector<Tensor>& params) {
        return gradient_check(f, params, {.step = 1e-5});
    };
    const std::size_t r = s.r, c = s.c, k = 1 + rng.below(4);
    Tensor w = random_tensor(r, c, rng);
    auto unary = [&](auto op, Tensor x) {
        return check([&](Tape& t, std::span<const Var> p) { return readout(t, op(p[0]), w); }, {x});
    };
    auto binary = [&](auto op) {
        return check([&](Tape& t, std::span<const Var> p) { return readout(t, op(p[0], p[1]), w); },
                     {random_tensor(r, c, rng), random_tensor(r, c, rng)});
    };
    double e = 0.0;
    e = std::max(e, check([&](Tape& t, std::span<const Var> p) { return readout(t, matmul(p[0], p[1]), w); },
                          {random_tensor(r, k, rng), random_tensor(k, c, rng)}));
    e = std::max(e,
                 check([&](Tape& t, std::span<const Var> p) { return readout(t, matmul_nt(p[0], p[1]), w); },
                       {random_tensor(r, k, rng), random_tensor(c, k, rng)}));
    e = std::max(e, binary([](Var a, Var b) { return add(a, b); }));
    e = std::max(e, binary([](Var a, Var b) { return sub(a, b); }));
    e = std::max(e, binary([](Var a, Var b) { return mul(a, b); }));
    e = std::max(e, unary([](Var a) { return scale(a, -1.3); }, random_tensor(r, c, rng)));
    e = std::max(e, unary([](Var a) { return leaky_relu(a); }, away_from_zero(r, c, rng)));
    e = std::max(e, unary([](Var a) { return tanh(a); }, random_tensor(r, c, rng, -2, 2)));
    e = std::max(e, unary([](Var a) { return log(a); }, random_tensor(r, c, rng, 0.5, 2.0)));
    // concat of a (r x 1) and b (r x c-1 or more), then readout over the joint width.
    {
        Tensor wide = random_tensor(r, c + 1, rng);
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                Var parts[2] = {p[0], p[1]};
                                return readout(t, concat_cols(parts), wide);
                            },
                            {random_tensor(r, 1, rng), random_tensor(r, c, rng)}));
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                return readout(t, slice_cols(p[0], 1, c + 1), w);
                            },
                            {random_tensor(r, c + 1, rng)}));
    }
    {
        Tensor x = random_tensor(1, r * c, rng, -3, 3);
        std::vector<std::uint8_t> mask(r * c);
        for (auto& m : mask) m = rng.bernoulli(0.3);
        mask[0] = 0;
        Tensor wm = random_tensor(1, r * c, rng);
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                return readout(t, masked_softmax(p[0], mask), wm);
                            },
                            {x}));
    }
    {
        Tensor w1 = random_tensor(1, c, rng);
        e = std::max(e, check([&](Tape& t, std::span<const Var> p) { return readout(t, max_rows(p[0]), w1); },
                              {random_tensor(r, c, rng)}));
    }
    {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < r + 2; ++i) idx.push_back(rng.below(r));
        Tensor wg = random_tensor(idx.size(), c, rng);
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                return readout(t, gather_rows(p[0], idx), wg);
                            },
                            {random_tensor(r, c, rng)}));
    }
    e = std::max(e, check([&](Tape& t, std::span<const Var> p) { return sum(p[0]); }, {random_tensor(r, c, rng)}));
    e = std::max(e, check([&](Tape& t, std::span<const Var> p) { return element(p[0], r - 1, 0); },
                          {random_tensor(r, c, rng)}));
    if (r > 1) {
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                return readout(t, batch_norm_train(p[0], p[1], p[2]), w);
                            },
                            {random_tensor(r, c, rng), random_tensor(1, c, rng, 0.5, 1.5),
                             random_tensor(1, c, rng)}));
    }
    {
        Tensor rm = random_tensor(1, c, rng), rv = random_tensor(1, c, rng, 0.5, 2.0);
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                return readout(t, batch_norm_eval(p[0], p[1], p[2], rm, rv), w);
                            },
                            {random_tensor(r, c, rng), random_tensor(1, c, rng), random_tensor(1, c, rng)}));
    }
    {
        // When every logit of a neighborhood has the same sign, the
        // output is exactly invariant to a[:h]; the linear term on a
        // keeps that coordinate's gradient away from zero.
        Graph g = random_graph(static_cast<int>(r), 0.5, seed * 31 + r);
        Tensor wa = random_tensor(1, 2 * c, rng);
        e = std::max(e, check(
                            [&](Tape& t, std::span<const Var> p) {
                                return add(readout(t, graph_attention(p[0], p[1], g), w), readout(t, p[1], wa));
                            },
                            {random_tensor(r, c, rng), random_tensor(1, 2 * c, rng)}));
    }
    {
        auto f = [&](Tape& t, std::span<const Var> p) {
            std::vector<std::optional<EntryRef>> entries{EntryRef{p[0], 0, c - 1}, std::nullopt,
                                                         EntryRef{p[1], 0, 0}, EntryRef{p[0], r - 1, 0}};
            return readout(t, stitch(t, entries), Tensor::row({1.5, 2.0, -0.5, 0.25}));
        };
        e = std::max(e, check(f, {random_tensor(r, c, rng), random_tensor(1, 1, rng)}));
    }
    return e;
}

}  // namespace fixtures
