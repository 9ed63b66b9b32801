#include "nodelab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nodelab/errors.hpp"

namespace nodelab {

namespace {

thread_local OperationCounts counts;

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " + b.shape_string() +
                     " do not conform");
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_mismatch(op, a, b);
}

void require_row(const char* op, const Tensor& t, std::size_t cols) {
    if (t.rows() != 1 || t.cols() != cols)
        throw ShapeError(std::string(op) + ": expected 1x" + std::to_string(cols) + ", got " + t.shape_string());
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols)
        throw ShapeError("tensor of shape " + shape_string() + " cannot hold " + std::to_string(values_.size()) +
                         " values");
}

Tensor Tensor::row(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(1, n, std::move(values));
}

std::string Tensor::shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

double Tensor::item() const {
    if (rows_ != 1 || cols_ != 1) throw ShapeError("item() on a " + shape_string() + " tensor");
    return values_[0];
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

OperationCounts operation_counts() { return counts; }
void reset_operation_counts() { counts = {}; }
void count_arithmetic(std::uint64_t n) { counts.arithmetic += n; }
void count_comparisons(std::uint64_t n) { counts.comparisons += n; }

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
    const std::size_t m = a.rows(), k = a.cols(), c = b.cols();
    Tensor out(m, c);
    for (std::size_t i = 0; i < m; ++i) {
        double* o = &out(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
            const double x = a(i, p);
            const double* br = &b(p, 0);
            for (std::size_t j = 0; j < c; ++j) o[j] += x * br[j];
        }
    }
    counts.arithmetic += 2 * m * k * c;
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) shape_mismatch("matmul_nt", a, b);
    const std::size_t m = a.rows(), k = a.cols(), c = b.rows();
    Tensor out(m, c);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ar = &a(i, 0);
        for (std::size_t j = 0; j < c; ++j) {
            const double* br = &b(j, 0);
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
            out(i, j) = s;
        }
    }
    counts.arithmetic += 2 * m * k * c;
    return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) shape_mismatch("matmul_tn", a, b);
    const std::size_t k = a.rows(), m = a.cols(), c = b.cols();
    Tensor out(m, c);
    for (std::size_t p = 0; p < k; ++p) {
        const double* br = &b(p, 0);
        for (std::size_t i = 0; i < m; ++i) {
            const double x = a(p, i);
            double* o = &out(i, 0);
            for (std::size_t j = 0; j < c; ++j) o[j] += x * br[j];
        }
    }
    counts.arithmetic += 2 * m * k * c;
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same("add", a, b);
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    counts.arithmetic += out.size();
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same("sub", a, b);
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    counts.arithmetic += out.size();
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same("mul", a, b);
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    counts.arithmetic += out.size();
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = a;
    for (double& v : out.values()) v *= s;
    counts.arithmetic += out.size();
    return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) return {};
    const std::size_t rows = parts[0].rows();
    std::size_t cols = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) shape_mismatch("concat_cols", parts[0], p);
        cols += p.cols();
    }
    Tensor out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double* o = &out(r, 0);
        for (const Tensor& p : parts) {
            auto src = p.row_span(r);
            o = std::copy(src.begin(), src.end(), o);
        }
    }
    return out;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols())
        throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside " + a.shape_string());
    Tensor out(a.rows(), end - begin);
    for (std::size_t r = 0; r < a.rows(); ++r)
        std::copy(&a(r, 0) + begin, &a(r, 0) + end, &out(r, 0));
    return out;
}

Tensor leaky_relu(const Tensor& a) {
    Tensor out = a;
    for (double& v : out.values())
        if (v < 0.0) v *= kLeakySlope;
    counts.arithmetic += out.size();
    return out;
}

Tensor tanh(const Tensor& a) {
    Tensor out = a;
    for (double& v : out.values()) v = std::tanh(v);
    counts.arithmetic += out.size();
    return out;
}

Tensor log(const Tensor& a) {
    Tensor out = a;
    for (double& v : out.values()) {
        if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
        v = std::log(v);
    }
    counts.arithmetic += out.size();
    return out;
}

Tensor masked_softmax(const Tensor& a, std::span<const std::uint8_t> excluded) {
    if (excluded.size() != a.size())
        throw ShapeError("masked_softmax: mask of length " + std::to_string(excluded.size()) + " for " +
                         a.shape_string());
    double top = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (excluded[i]) continue;
        if (!any || a[i] > top) top = a[i];
        any = true;
    }
    if (!any) throw UsageError("masked_softmax: every entry is masked");
    Tensor out(a.rows(), a.cols());
    double total = 0.0;
    std::size_t live = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (excluded[i]) continue;
        out[i] = std::exp(a[i] - top);
        total += out[i];
        ++live;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!excluded[i]) out[i] /= total;
    counts.arithmetic += 4 * live;
    counts.comparisons += live;
    return out;
}

Tensor max_rows(const Tensor& a, std::vector<std::size_t>* argmax) {
    if (a.rows() == 0) throw ShapeError("max_rows of an empty tensor");
    Tensor out(1, a.cols());
    std::vector<std::size_t> arg(a.cols(), 0);
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] = a(0, c);
    for (std::size_t r = 1; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (a(r, c) > out[c]) {
                out[c] = a(r, c);
                arg[c] = r;
            }
    counts.comparisons += (a.rows() - 1) * a.cols();
    if (argmax) *argmax = std::move(arg);
    return out;
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
    Tensor out(rows.size(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= a.rows())
            throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " outside " + a.shape_string());
        auto src = a.row_span(rows[i]);
        std::copy(src.begin(), src.end(), &out(i, 0));
    }
    return out;
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    counts.arithmetic += a.size();
    return Tensor::scalar(s);
}

Tensor element(const Tensor& a, std::size_t r, std::size_t c) {
    if (r >= a.rows() || c >= a.cols())
        throw ShapeError("element (" + std::to_string(r) + ", " + std::to_string(c) + ") outside " +
                         a.shape_string());
    return Tensor::scalar(a(r, c));
}

Tensor batch_norm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchStatistics* stats) {
    const std::size_t n = x.rows(), c = x.cols();
    require_row("batch_norm gamma", gamma, c);
    require_row("batch_norm beta", beta, c);
    if (n == 0) throw ShapeError("batch_norm over an empty batch");
    Tensor mean(1, c), var(1, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) mean[j] += x(i, j);
    for (std::size_t j = 0; j < c; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double d = x(i, j) - mean[j];
            var[j] += d * d;
        }
    for (std::size_t j = 0; j < c; ++j) var[j] /= static_cast<double>(n);
    Tensor out(n, c);
    for (std::size_t j = 0; j < c; ++j) {
        const double inv = 1.0 / std::sqrt(var[j] + kBatchNormEpsilon);
        for (std::size_t i = 0; i < n; ++i) out(i, j) = gamma[j] * ((x(i, j) - mean[j]) * inv) + beta[j];
    }
    counts.arithmetic += 8 * n * c;
    if (stats) *stats = {std::move(mean), std::move(var)};
    return out;
}

Tensor batch_norm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& running_mean,
                       const Tensor& running_var) {
    const std::size_t n = x.rows(), c = x.cols();
    require_row("batch_norm gamma", gamma, c);
    require_row("batch_norm beta", beta, c);
    require_row("batch_norm running mean", running_mean, c);
    require_row("batch_norm running variance", running_var, c);
    Tensor out(n, c);
    for (std::size_t j = 0; j < c; ++j) {
        const double inv = 1.0 / std::sqrt(running_var[j] + kBatchNormEpsilon);
        for (std::size_t i = 0; i < n; ++i)
            out(i, j) = gamma[j] * ((x(i, j) - running_mean[j]) * inv) + beta[j];
    }
    counts.arithmetic += 4 * n * c;
    return out;
}

void update_running_statistics(Tensor& running_mean, Tensor& running_var, const BatchStatistics& stats,
                               std::size_t batch_rows) {
    const double correction =
        batch_rows > 1 ? static_cast<double>(batch_rows) / static_cast<double>(batch_rows - 1) : 1.0;
    for (std::size_t j = 0; j < running_mean.size(); ++j) {
        running_mean[j] = (1.0 - kBatchNormMomentum) * running_mean[j] + kBatchNormMomentum * stats.mean[j];
        running_var[j] =
            (1.0 - kBatchNormMomentum) * running_var[j] + kBatchNormMomentum * stats.variance[j] * correction;
    }
}

Tensor graph_attention(const Tensor& z, const Tensor& a, const Graph& g, AttentionCache* cache) {
    const std::size_t n = z.rows(), h = z.cols();
    if (static_cast<std::size_t>(g.node_count()) != n)
        throw ShapeError("graph_attention: " + std::to_string(g.node_count()) + " nodes but z is " +
                         z.shape_string());
    require_row("graph_attention weights", a, 2 * h);

    std::vector<double> self_score(n), other_score(n);
    for (std::size_t v = 0; v < n; ++v) {
        double s = 0.0, r = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
            s += a[j] * z(v, j);
            r += a[h + j] * z(v, j);
        }
        self_score[v] = s;
        other_score[v] = r;
    }
    counts.arithmetic += 4 * n * h;

    AttentionCache local;
    AttentionCache& c = cache ? *cache : local;
    c.offsets.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v)
        c.offsets[v + 1] = c.offsets[v] + static_cast<std::size_t>(g.degree(static_cast<NodeId>(v))) + 1;
    const std::size_t total = c.offsets[n];
    c.order.resize(total);
    c.alpha.resize(total);
    c.logits.resize(total);

    auto row_less = [&](NodeId x, NodeId y) {
        auto rx = z.row_span(static_cast<std::size_t>(x)), ry = z.row_span(static_cast<std::size_t>(y));
        return std::lexicographical_compare(rx.begin(), rx.end(), ry.begin(), ry.end());
    };

    Tensor out(n, h);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t base = c.offsets[v];
        const std::size_t count = c.offsets[v + 1] - base;
        NodeId* members = c.order.data() + base;
        members[0] = static_cast<NodeId>(v);
        auto nb = g.neighbors(static_cast<NodeId>(v));
        std::copy(nb.begin(), nb.end(), members + 1);
        std::stable_sort(members, members + count, row_less);

        double top = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            double e = self_score[v] + other_score[members[i]];
            if (e < 0.0) e *= kLeakySlope;
            c.logits[base + i] = self_score[v] + other_score[members[i]];
            if (i == 0 || e > top) top = e;
            c.alpha[base + i] = e;
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            c.alpha[base + i] = std::exp(c.alpha[base + i] - top);
            norm += c.alpha[base + i];
        }
        double* o = &out(v, 0);
        for (std::size_t i = 0; i < count; ++i) {
            const double w = c.alpha[base + i] / norm;
            c.alpha[base + i] = w;
            const double* zr = &z(static_cast<std::size_t>(members[i]), 0);
            for (std::size_t j = 0; j < h; ++j) o[j] += w * zr[j];
        }
        counts.arithmetic += count * (6 + 2 * h);
        counts.comparisons += count;
    }
    return out;
}

}  // namespace nodelab
