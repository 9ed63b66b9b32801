#include "nodelab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "nodelab/errors.hpp"
#include "nodelab/rng.hpp"

namespace nodelab {

namespace {

Tape& tape_of(Var a) {
    if (!a.tape) throw UsageError("operation on an unbound Var");
    return *a.tape;
}

Tape& tape_of(Var a, Var b) {
    if (a.tape != b.tape) throw UsageError("operands live on different tapes");
    return tape_of(a);
}

}  // namespace

const Tensor& Var::value() const { return tape_of(*this).value(id); }

Var Tape::constant(Tensor value) {
    nodes_.push_back({std::move(value), {}, false, {}});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::variable(Tensor value) {
    nodes_.push_back({std::move(value), {}, true, {}});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward) {
    bool needs = false;
    for (Var p : parents) {
        if (p.tape != this) throw UsageError("operands live on different tapes");
        needs = needs || requires_grad(p.id);
    }
    nodes_.push_back({std::move(value), {}, needs, needs ? std::move(backward) : Backward{}});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Tensor& g) {
    Node& node = nodes_[static_cast<std::size_t>(v.id)];
    if (!node.requires_grad) return;
    if (!g.same_shape(node.value))
        throw ShapeError("gradient of shape " + g.shape_string() + " for value of shape " +
                         node.value.shape_string());
    if (node.grad.empty()) {
        node.grad = g;
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw UsageError("backward: loss lives on another tape");
    const Tensor& lv = value(loss.id);
    if (lv.rows() != 1 || lv.cols() != 1) throw UsageError("backward: loss is " + lv.shape_string() + ", not scalar");
    for (Node& n : nodes_) n.grad = Tensor();
    if (!requires_grad(loss.id)) return;
    nodes_[static_cast<std::size_t>(loss.id)].grad = Tensor::scalar(1.0);
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.backward || n.grad.empty()) continue;
        n.backward(*this, n.grad);
    }
}

Tensor Tape::gradient(Var v) const {
    const Node& n = nodes_[static_cast<std::size_t>(v.id)];
    if (n.grad.empty()) return Tensor(n.value.rows(), n.value.cols());
    return n.grad;
}

Var matmul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.record(matmul(a.value(), b.value()), {a, b}, [a, b](Tape& tape, const Tensor& g) {
        tape.accumulate(a, matmul_nt(g, b.value()));
        tape.accumulate(b, matmul_tn(a.value(), g));
    });
}

Var matmul_nt(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.record(matmul_nt(a.value(), b.value()), {a, b}, [a, b](Tape& tape, const Tensor& g) {
        tape.accumulate(a, matmul(g, b.value()));
        tape.accumulate(b, matmul_tn(g, a.value()));
    });
}

Var add(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.record(add(a.value(), b.value()), {a, b}, [a, b](Tape& tape, const Tensor& g) {
        tape.accumulate(a, g);
        tape.accumulate(b, g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.record(sub(a.value(), b.value()), {a, b}, [a, b](Tape& tape, const Tensor& g) {
        tape.accumulate(a, g);
        tape.accumulate(b, scale(g, -1.0));
    });
}

Var mul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.record(mul(a.value(), b.value()), {a, b}, [a, b](Tape& tape, const Tensor& g) {
        tape.accumulate(a, mul(g, b.value()));
        tape.accumulate(b, mul(g, a.value()));
    });
}

Var scale(Var a, double s) {
    return tape_of(a).record(scale(a.value(), s), {a},
                             [a, s](Tape& tape, const Tensor& g) { tape.accumulate(a, scale(g, s)); });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw UsageError("concat_cols of nothing");
    Tape& t = tape_of(parts[0]);
    std::vector<Tensor> values;
    values.reserve(parts.size());
    for (Var p : parts) values.push_back(p.value());
    std::vector<Var> keep(parts.begin(), parts.end());
    return t.record(concat_cols(values), parts, [keep](Tape& tape, const Tensor& g) {
        std::size_t begin = 0;
        for (Var p : keep) {
            const std::size_t width = p.value().cols();
            tape.accumulate(p, slice_cols(g, begin, begin + width));
            begin += width;
        }
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
    return tape_of(a).record(slice_cols(a.value(), begin, end), {a}, [a, begin, end](Tape& tape, const Tensor& g) {
        Tensor full(a.value().rows(), a.value().cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = begin; c < end; ++c) full(r, c) = g(r, c - begin);
        tape.accumulate(a, full);
    });
}

Var leaky_relu(Var a) {
    return tape_of(a).record(leaky_relu(a.value()), {a}, [a](Tape& tape, const Tensor& g) {
        Tensor d = g;
        const Tensor& x = a.value();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (!(x[i] > 0.0)) d[i] *= kLeakySlope;
        tape.accumulate(a, d);
    });
}

Var tanh(Var a) {
    Tensor y = tanh(a.value());
    Tensor keep = y;
    return tape_of(a).record(std::move(y), {a}, [a, keep](Tape& tape, const Tensor& g) {
        Tensor d = g;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - keep[i] * keep[i];
        tape.accumulate(a, d);
    });
}

Var log(Var a) {
    return tape_of(a).record(log(a.value()), {a}, [a](Tape& tape, const Tensor& g) {
        Tensor d = g;
        const Tensor& x = a.value();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] /= x[i];
        tape.accumulate(a, d);
    });
}

Var masked_softmax(Var a, std::span<const std::uint8_t> excluded) {
    Tensor p = masked_softmax(a.value(), excluded);
    Tensor keep = p;
    return tape_of(a).record(std::move(p), {a}, [a, keep](Tape& tape, const Tensor& g) {
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * keep[i];
        Tensor d(keep.rows(), keep.cols());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = keep[i] * (g[i] - dot);
        tape.accumulate(a, d);
    });
}

Var max_rows(Var a) {
    std::vector<std::size_t> arg;
    Tensor out = max_rows(a.value(), &arg);
    return tape_of(a).record(std::move(out), {a}, [a, arg](Tape& tape, const Tensor& g) {
        Tensor d(a.value().rows(), a.value().cols());
        for (std::size_t c = 0; c < arg.size(); ++c) d(arg[c], c) = g[c];
        tape.accumulate(a, d);
    });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    return tape_of(a).record(gather_rows(a.value(), rows), {a}, [a, idx](Tape& tape, const Tensor& g) {
        Tensor d(a.value().rows(), a.value().cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t c = 0; c < g.cols(); ++c) d(idx[i], c) += g(i, c);
        tape.accumulate(a, d);
    });
}

Var sum(Var a) {
    return tape_of(a).record(sum(a.value()), {a}, [a](Tape& tape, const Tensor& g) {
        tape.accumulate(a, Tensor(a.value().rows(), a.value().cols(), g.item()));
    });
}

Var element(Var a, std::size_t r, std::size_t c) {
    return tape_of(a).record(element(a.value(), r, c), {a}, [a, r, c](Tape& tape, const Tensor& g) {
        Tensor d(a.value().rows(), a.value().cols());
        d(r, c) = g.item();
        tape.accumulate(a, d);
    });
}

Var batch_norm_train(Var x, Var gamma, Var beta, BatchStatistics* stats) {
    Tape& t = tape_of(x, gamma);
    tape_of(x, beta);
    BatchStatistics s;
    Tensor out = batch_norm_train(x.value(), gamma.value(), beta.value(), &s);
    if (stats) *stats = s;
    return t.record(std::move(out), {x, gamma, beta}, [x, gamma, beta, s](Tape& tape, const Tensor& g) {
        const Tensor& xv = x.value();
        const Tensor& gm = gamma.value();
        const std::size_t n = xv.rows(), c = xv.cols();
        const double nn = static_cast<double>(n);
        Tensor dx(n, c), dgamma(1, c), dbeta(1, c);
        for (std::size_t j = 0; j < c; ++j) {
            const double inv = 1.0 / std::sqrt(s.variance[j] + kBatchNormEpsilon);
            double sum_d = 0.0, sum_dx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double xhat = (xv(i, j) - s.mean[j]) * inv;
                const double dxhat = g(i, j) * gm[j];
                sum_d += dxhat;
                sum_dx += dxhat * xhat;
                dgamma[j] += g(i, j) * xhat;
                dbeta[j] += g(i, j);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double xhat = (xv(i, j) - s.mean[j]) * inv;
                const double dxhat = g(i, j) * gm[j];
                dx(i, j) = inv / nn * (nn * dxhat - sum_d - xhat * sum_dx);
            }
        }
        tape.accumulate(x, dx);
        tape.accumulate(gamma, dgamma);
        tape.accumulate(beta, dbeta);
    });
}

Var batch_norm_eval(Var x, Var gamma, Var beta, const Tensor& running_mean, const Tensor& running_var) {
    Tape& t = tape_of(x, gamma);
    tape_of(x, beta);
    Tensor out = batch_norm_eval(x.value(), gamma.value(), beta.value(), running_mean, running_var);
    Tensor inv(1, running_var.cols());
    for (std::size_t j = 0; j < inv.size(); ++j) inv[j] = 1.0 / std::sqrt(running_var[j] + kBatchNormEpsilon);
    return t.record(std::move(out), {x, gamma, beta}, [x, gamma, beta, running_mean, inv](Tape& tape, const Tensor& g) {
        const Tensor& xv = x.value();
        const Tensor& gm = gamma.value();
        Tensor dx(xv.rows(), xv.cols()), dgamma(1, xv.cols()), dbeta(1, xv.cols());
        for (std::size_t i = 0; i < xv.rows(); ++i)
            for (std::size_t j = 0; j < xv.cols(); ++j) {
                dx(i, j) = g(i, j) * gm[j] * inv[j];
                dgamma[j] += g(i, j) * (xv(i, j) - running_mean[j]) * inv[j];
                dbeta[j] += g(i, j);
            }
        tape.accumulate(x, dx);
        tape.accumulate(gamma, dgamma);
        tape.accumulate(beta, dbeta);
    });
}

Var graph_attention(Var z, Var a, const Graph& graph) {
    Tape& t = tape_of(z, a);
    auto cache = std::make_shared<AttentionCache>();
    Tensor out = graph_attention(z.value(), a.value(), graph, cache.get());
    return t.record(std::move(out), {z, a}, [z, a, cache](Tape& tape, const Tensor& g) {
        const Tensor& zv = z.value();
        const Tensor& av = a.value();
        const std::size_t n = zv.rows(), h = zv.cols();
        Tensor dz(n, h), da(1, 2 * h);
        std::vector<double> ds(n, 0.0), dr(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            const std::size_t base = cache->offsets[v], end = cache->offsets[v + 1];
            const double* gv = &g(v, 0);
            // d alpha_vu = g_v . z_u; d e = alpha (d alpha - sum alpha d alpha)
            double weighted = 0.0;
            std::vector<double> dalpha(end - base);
            for (std::size_t i = base; i < end; ++i) {
                const std::size_t u = static_cast<std::size_t>(cache->order[i]);
                double s = 0.0;
                for (std::size_t j = 0; j < h; ++j) {
                    s += gv[j] * zv(u, j);
                    dz(u, j) += cache->alpha[i] * gv[j];
                }
                dalpha[i - base] = s;
                weighted += cache->alpha[i] * s;
            }
            for (std::size_t i = base; i < end; ++i) {
                const std::size_t u = static_cast<std::size_t>(cache->order[i]);
                double de = cache->alpha[i] * (dalpha[i - base] - weighted);
                if (!(cache->logits[i] > 0.0)) de *= kLeakySlope;
                ds[v] += de;
                dr[u] += de;
            }
        }
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t j = 0; j < h; ++j) {
                dz(v, j) += ds[v] * av[j] + dr[v] * av[h + j];
                da[j] += ds[v] * zv(v, j);
                da[h + j] += dr[v] * zv(v, j);
            }
        tape.accumulate(z, dz);
        tape.accumulate(a, da);
    });
}

Var stitch(Tape& tape, std::span<const std::optional<EntryRef>> entries) {
    Tensor out(1, entries.size());
    std::vector<Var> parents;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i]) continue;
        const EntryRef& e = *entries[i];
        if (e.source.tape != &tape) throw UsageError("stitch: entry from another tape");
        out[i] = e.source.value()(e.row, e.col);
        parents.push_back(e.source);
    }
    std::vector<std::optional<EntryRef>> keep(entries.begin(), entries.end());
    return tape.record(std::move(out), parents, [keep](Tape& t, const Tensor& g) {
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (!keep[i] || !t.requires_grad(keep[i]->source.id)) continue;
            const EntryRef& e = *keep[i];
            Tensor d(e.source.value().rows(), e.source.value().cols());
            d(e.row, e.col) = g[i];
            t.accumulate(e.source, d);
        }
    });
}

double gradient_check(const ScalarFunction& f, const std::vector<Tensor>& params,
                      const GradientCheckOptions& options) {
    auto evaluate = [&](const std::vector<Tensor>& at) {
        Tape tape;
        std::vector<Var> vars;
        for (const Tensor& p : at) vars.push_back(tape.constant(p));
        double v = f(tape, vars).value().item();
        if (!std::isfinite(v)) throw DomainError("gradient_check: non-finite function value");
        return v;
    };

    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& p : params) vars.push_back(tape.variable(p));
    Var loss = f(tape, vars);
    if (!std::isfinite(loss.value().item())) throw DomainError("gradient_check: non-finite function value");
    tape.backward(loss);
    std::vector<Tensor> analytic;
    for (Var v : vars) analytic.push_back(tape.gradient(v));

    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t p = 0; p < params.size(); ++p)
        for (std::size_t i = 0; i < params[p].size(); ++i) coords.push_back({p, i});
    if (options.max_coordinates > 0 && coords.size() > options.max_coordinates) {
        Rng rng(options.seed);
        rng.shuffle(coords);
        coords.resize(options.max_coordinates);
    }

    double worst = 0.0;
    std::vector<Tensor> probe = params;
    for (auto [p, i] : coords) {
        const double original = probe[p][i];
        probe[p][i] = original + options.step;
        const double up = evaluate(probe);
        probe[p][i] = original - options.step;
        const double down = evaluate(probe);
        probe[p][i] = original;
        const double numeric = (up - down) / (2.0 * options.step);
        const double exact = analytic[p][i];
        if (!std::isfinite(exact)) throw DomainError("gradient_check: non-finite analytic gradient");
        const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
    return worst;
}

}  // namespace nodelab
