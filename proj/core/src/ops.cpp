#include "neuromix/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "neuromix/error.hpp"

namespace neuromix {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void require_same_tape(Var a, Var b) {
    if (&a.tape() != &b.tape()) throw StateError("operands recorded on different tapes");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
    }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
    if (a.rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             shape_string(a.shape()));
    }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid_scalar(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void add_into(Tensor* dst, const Tensor& src) {
    if (!dst) return;
    auto d = dst->data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

double log_sigmoid(double z) { return -softplus(-z); }

Var add(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "add");
    Tensor y = a.value();
    auto yd = y.data();
    auto bd = b.value().data();
    for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += bd[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(y), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        add_into(t.grad_target(ia), g);
        add_into(t.grad_target(ib), g);
    });
}

Var sub(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "sub");
    Tensor y = a.value();
    auto yd = y.data();
    auto bd = b.value().data();
    for (std::size_t i = 0; i < yd.size(); ++i) yd[i] -= bd[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(y), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        add_into(t.grad_target(ia), g);
        if (Tensor* gb = t.grad_target(ib)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    require_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "mul");
    Tensor y = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(y), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        if (Tensor* ga = t.grad_target(ia)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
        }
        if (Tensor* gb = t.grad_target(ib)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
        }
    });
}

Var scale(Var a, double factor) {
    Tensor y = a.value();
    for (auto& v : y.data()) v *= factor;
    const std::size_t ia = a.id();
    return a.tape().record(std::move(y), {ia}, [ia, factor](Tape& t, const Tensor& g) {
        if (Tensor* ga = t.grad_target(ia)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * factor;
        }
    });
}

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    const std::size_t ia = a.id();
    return a.tape().record(Tensor({1}, s), {ia}, [ia](Tape& t, const Tensor& g) {
        if (Tensor* ga = t.grad_target(ia)) {
            for (auto& v : ga->data()) v += g[0];
        }
    });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var weighted_sum(const Tensor& weights, Var a) {
    require_same_shape(weights, a.value(), "weighted_sum");
    const Tensor& x = a.value();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
    const std::size_t ia = a.id();
    return a.tape().record(Tensor({1}, s), {ia}, [ia, weights](Tape& t, const Tensor& g) {
        if (Tensor* ga = t.grad_target(ia)) {
            for (std::size_t i = 0; i < weights.size(); ++i) (*ga)[i] += g[0] * weights[i];
        }
    });
}

Var relu(Var a) {
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    const std::size_t ia = a.id();
    return a.tape().record(std::move(y), {ia}, [ia](Tape& t, const Tensor& g) {
        if (Tensor* ga = t.grad_target(ia)) {
            const Tensor& x = t.value(ia);
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (x[i] > 0.0) (*ga)[i] += g[i];
            }
        }
    });
}

Tensor sigmoid(const Tensor& a) {
    Tensor y(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = sigmoid_scalar(a[i]);
    return y;
}

Var sigmoid(Var a) {
    Tensor y = sigmoid(a.value());
    const std::size_t ia = a.id();
    Tensor y_copy = y;
    return a.tape().record(std::move(y), {ia}, [ia, y = std::move(y_copy)](Tape& t, const Tensor& g) {
        if (Tensor* ga = t.grad_target(ia)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
        }
    });
}

Var log_sigmoid(Var a) {
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = log_sigmoid(x[i]);
    const std::size_t ia = a.id();
    return a.tape().record(std::move(y), {ia}, [ia](Tape& t, const Tensor& g) {
        if (Tensor* ga = t.grad_target(ia)) {
            const Tensor& x = t.value(ia);
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * sigmoid_scalar(-x[i]);
        }
    });
}

Tensor softmax_rows(const Tensor& a) {
    require_rank(a, 2, "softmax_rows");
    Tensor y(a.shape());
    const std::size_t n = a.dim(0), k = a.dim(1);
    for (std::size_t i = 0; i < n; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) m = std::max(m, a.at(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            y.at(i, j) = std::exp(a.at(i, j) - m);
            s += y.at(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) y.at(i, j) /= s;
    }
    return y;
}

Tensor log_softmax_rows(const Tensor& a) {
    require_rank(a, 2, "log_softmax_rows");
    Tensor y(a.shape());
    const std::size_t n = a.dim(0), k = a.dim(1);
    for (std::size_t i = 0; i < n; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) m = std::max(m, a.at(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += std::exp(a.at(i, j) - m);
        const double lse = m + std::log(s);
        for (std::size_t j = 0; j < k; ++j) y.at(i, j) = a.at(i, j) - lse;
    }
    return y;
}

Var softmax_rows(Var a) {
    Tensor y = softmax_rows(a.value());
    const std::size_t ia = a.id();
    Tensor y_copy = y;
    return a.tape().record(std::move(y), {ia}, [ia, y = std::move(y_copy)](Tape& t, const Tensor& g) {
        Tensor* ga = t.grad_target(ia);
        if (!ga) return;
        const std::size_t n = y.dim(0), k = y.dim(1);
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < k; ++j) dot += g.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < k; ++j) ga->at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
    });
}

Var log_softmax_rows(Var a) {
    Tensor y = log_softmax_rows(a.value());
    const std::size_t ia = a.id();
    return a.tape().record(std::move(y), {ia}, [ia](Tape& t, const Tensor& g) {
        Tensor* ga = t.grad_target(ia);
        if (!ga) return;
        const Tensor p = softmax_rows(t.value(ia));
        const std::size_t n = p.dim(0), k = p.dim(1);
        for (std::size_t i = 0; i < n; ++i) {
            double gs = 0.0;
            for (std::size_t j = 0; j < k; ++j) gs += g.at(i, j);
            for (std::size_t j = 0; j < k; ++j) ga->at(i, j) += g.at(i, j) - p.at(i, j) * gs;
        }
    });
}

Var dense(Var x, Var weight, Var bias) {
    require_same_tape(x, weight);
    require_same_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& wv = weight.value();
    const Tensor& bv = bias.value();
    require_rank(xv, 2, "dense input");
    require_rank(wv, 2, "dense weight");
    const std::size_t n = xv.dim(0), in = xv.dim(1), out = wv.dim(1);
    if (wv.dim(0) != in) {
        throw DimensionError("dense: input has " + std::to_string(in) + " features, weight expects " +
                             std::to_string(wv.dim(0)));
    }
    if (bv.size() != out) throw DimensionError("dense: bias size does not match output width");

    Tensor y({n, out});
    MatrixMap ym(y.raw(), n, out);
    ym.noalias() = ConstMatrixMap(xv.raw(), n, in) * ConstMatrixMap(wv.raw(), in, out);
    ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bv.raw(), out);

    const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
    return x.tape().record(std::move(y), {ix, iw, ib}, [ix, iw, ib, n, in, out](Tape& t, const Tensor& g) {
        ConstMatrixMap gm(g.raw(), n, out);
        if (Tensor* gx = t.grad_target(ix)) {
            MatrixMap(gx->raw(), n, in).noalias() += gm * ConstMatrixMap(t.value(iw).raw(), in, out).transpose();
        }
        if (Tensor* gw = t.grad_target(iw)) {
            MatrixMap(gw->raw(), in, out).noalias() += ConstMatrixMap(t.value(ix).raw(), n, in).transpose() * gm;
        }
        if (Tensor* gb = t.grad_target(ib)) {
            Eigen::Map<Eigen::RowVectorXd>(gb->raw(), out) += gm.colwise().sum();
        }
    });
}

namespace {

struct ConvGeometry {
    std::size_t n, c, h, w, out, k;
    std::size_t hw() const { return h * w; }
    std::size_t patch() const { return c * k * k; }
};

// Samples processed per GEMM so that small feature maps still give the
// matrix product a reasonably wide right-hand side.
std::size_t conv_chunk(const ConvGeometry& g) {
    return std::clamp<std::size_t>(4096 / g.hw(), 1, g.n);
}

// Unfolds samples [first, first+count) into cols (patch x count*hw).
// Output columns [x0, x1) of a row read input column xx + kx - pad in range.
struct RowSpan {
    std::size_t x0, x1;
    long shift;
};

RowSpan valid_span(const ConvGeometry& g, std::size_t kx) {
    const long shift = static_cast<long>(kx) - static_cast<long>(g.k / 2);
    const long w = static_cast<long>(g.w);
    return {static_cast<std::size_t>(std::clamp(-shift, 0L, w)), static_cast<std::size_t>(std::clamp(w - shift, 0L, w)),
            shift};
}

// Unfolds samples [first, first+count) into cols (patch x count*hw).
void im2col(const ConvGeometry& g, const double* x, std::size_t first, std::size_t count, RowMatrix& cols) {
    const std::size_t hw = g.hw();
    const long pad = static_cast<long>(g.k / 2);
    cols.resize(static_cast<long>(g.patch()), static_cast<long>(count * hw));
    for (std::size_t ch = 0; ch < g.c; ++ch) {
        for (std::size_t ky = 0; ky < g.k; ++ky) {
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                const RowSpan span = valid_span(g, kx);
                const std::size_t r = (ch * g.k + ky) * g.k + kx;
                double* dst = cols.row(static_cast<long>(r)).data();
                for (std::size_t b = 0; b < count; ++b) {
                    const double* src = x + ((first + b) * g.c + ch) * hw;
                    for (std::size_t yy = 0; yy < g.h; ++yy) {
                        double* d = dst + b * hw + yy * g.w;
                        const long sy = static_cast<long>(yy + ky) - pad;
                        if (sy < 0 || sy >= static_cast<long>(g.h)) {
                            std::fill(d, d + g.w, 0.0);
                            continue;
                        }
                        const double* s = src + sy * static_cast<long>(g.w) + span.shift;
                        std::fill(d, d + span.x0, 0.0);
                        std::copy(s + span.x0, s + span.x1, d + span.x0);
                        std::fill(d + span.x1, d + g.w, 0.0);
                    }
                }
            }
        }
    }
}

void col2im_add(const ConvGeometry& g, const RowMatrix& cols, std::size_t first, std::size_t count, double* dx) {
    const std::size_t hw = g.hw();
    const long pad = static_cast<long>(g.k / 2);
    for (std::size_t ch = 0; ch < g.c; ++ch) {
        for (std::size_t ky = 0; ky < g.k; ++ky) {
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                const RowSpan span = valid_span(g, kx);
                const std::size_t r = (ch * g.k + ky) * g.k + kx;
                const double* srcrow = cols.row(static_cast<long>(r)).data();
                for (std::size_t b = 0; b < count; ++b) {
                    double* dst = dx + ((first + b) * g.c + ch) * hw;
                    for (std::size_t yy = 0; yy < g.h; ++yy) {
                        const long sy = static_cast<long>(yy + ky) - pad;
                        if (sy < 0 || sy >= static_cast<long>(g.h)) continue;
                        const double* s = srcrow + b * hw + yy * g.w;
                        double* d = dst + sy * static_cast<long>(g.w) + span.shift;
                        for (std::size_t xx = span.x0; xx < span.x1; ++xx) d[xx] += s[xx];
                    }
                }
            }
        }
    }
}

}  // namespace

Var conv2d(Var x, Var weight, Var bias) {
    require_same_tape(x, weight);
    require_same_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& wv = weight.value();
    const Tensor& bv = bias.value();
    require_rank(xv, 4, "conv2d input");
    require_rank(wv, 4, "conv2d weight");
    ConvGeometry geo{xv.dim(0), xv.dim(1), xv.dim(2), xv.dim(3), wv.dim(0), wv.dim(2)};
    if (wv.dim(1) != geo.c) {
        throw DimensionError("conv2d: input has " + std::to_string(geo.c) + " channels, weight expects " +
                             std::to_string(wv.dim(1)));
    }
    if (wv.dim(3) != geo.k || geo.k % 2 == 0) throw DimensionError("conv2d: kernel must be square with odd size");
    if (bv.size() != geo.out) throw DimensionError("conv2d: bias size does not match output channels");

    const std::size_t hw = geo.hw();
    Tensor y({geo.n, geo.out, geo.h, geo.w});
    ConstMatrixMap wm(wv.raw(), static_cast<long>(geo.out), static_cast<long>(geo.patch()));
    RowMatrix cols, prod;
    const std::size_t chunk = conv_chunk(geo);
    for (std::size_t first = 0; first < geo.n; first += chunk) {
        const std::size_t count = std::min(chunk, geo.n - first);
        im2col(geo, xv.raw(), first, count, cols);
        prod.noalias() = wm * cols;
        for (std::size_t b = 0; b < count; ++b) {
            for (std::size_t o = 0; o < geo.out; ++o) {
                const double* src = prod.row(static_cast<long>(o)).data() + b * hw;
                double* dst = y.raw() + ((first + b) * geo.out + o) * hw;
                const double bo = bv[o];
                for (std::size_t p = 0; p < hw; ++p) dst[p] = src[p] + bo;
            }
        }
    }

    const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
    return x.tape().record(std::move(y), {ix, iw, ib}, [ix, iw, ib, geo](Tape& t, const Tensor& g) {
        const std::size_t hw = geo.hw();
        Tensor* gx = t.grad_target(ix);
        Tensor* gw = t.grad_target(iw);
        Tensor* gb = t.grad_target(ib);
        const Tensor& xv = t.value(ix);
        ConstMatrixMap wm(t.value(iw).raw(), static_cast<long>(geo.out), static_cast<long>(geo.patch()));
        RowMatrix cols, gy, gcols;
        const std::size_t chunk = conv_chunk(geo);
        for (std::size_t first = 0; first < geo.n; first += chunk) {
            const std::size_t count = std::min(chunk, geo.n - first);
            gy.resize(static_cast<long>(geo.out), static_cast<long>(count * hw));
            for (std::size_t b = 0; b < count; ++b) {
                for (std::size_t o = 0; o < geo.out; ++o) {
                    const double* src = g.raw() + ((first + b) * geo.out + o) * hw;
                    std::copy(src, src + hw, gy.row(static_cast<long>(o)).data() + b * hw);
                }
            }
            if (gb) Eigen::Map<Eigen::VectorXd>(gb->raw(), static_cast<long>(geo.out)) += gy.rowwise().sum();
            if (gw) {
                im2col(geo, xv.raw(), first, count, cols);
                MatrixMap(gw->raw(), static_cast<long>(geo.out), static_cast<long>(geo.patch())).noalias() +=
                    gy * cols.transpose();
            }
            if (gx) {
                gcols.noalias() = wm.transpose() * gy;
                col2im_add(geo, gcols, first, count, gx->raw());
            }
        }
    });
}

Var maxpool2d(Var x, std::size_t window) {
    const Tensor& xv = x.value();
    require_rank(xv, 4, "maxpool2d");
    if (window == 0) throw DimensionError("maxpool2d: window must be positive");
    const std::size_t n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    const std::size_t oh = (h + window - 1) / window, ow = (w + window - 1) / window;
    Tensor y({n, c, oh, ow});
    std::vector<std::size_t> argmax(y.size());
    for (std::size_t plane = 0; plane < n * c; ++plane) {
        const double* src = xv.raw() + plane * h * w;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = (oy * window) * w + ox * window;
                for (std::size_t dy = 0; dy < window && oy * window + dy < h; ++dy) {
                    for (std::size_t dx = 0; dx < window && ox * window + dx < w; ++dx) {
                        const std::size_t idx = (oy * window + dy) * w + ox * window + dx;
                        if (src[idx] > best) {
                            best = src[idx];
                            best_idx = idx;
                        }
                    }
                }
                const std::size_t o = plane * oh * ow + oy * ow + ox;
                y[o] = best;
                argmax[o] = plane * h * w + best_idx;
            }
        }
    }
    const std::size_t ix = x.id();
    return x.tape().record(std::move(y), {ix}, [ix, argmax = std::move(argmax)](Tape& t, const Tensor& g) {
        if (Tensor* gx = t.grad_target(ix)) {
            for (std::size_t o = 0; o < g.size(); ++o) (*gx)[argmax[o]] += g[o];
        }
    });
}

Var flatten(Var x) {
    const Tensor& xv = x.value();
    const std::size_t n = xv.dim(0);
    Tensor y = xv.reshaped({n, xv.size() / n});
    const std::size_t ix = x.id();
    return x.tape().record(std::move(y), {ix}, [ix](Tape& t, const Tensor& g) {
        if (Tensor* gx = t.grad_target(ix)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
        }
    });
}

Var detach(Var a) { return a.tape().constant(a.value()); }

ColumnMoments column_moments(const Tensor& a, double eps) {
    require_rank(a, 2, "column_moments");
    const std::size_t n = a.dim(0), k = a.dim(1);
    ColumnMoments m{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a.at(i, j);
        const double mu = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a.at(i, j) - mu;
            ss += d * d;
        }
        m.mean[j] = mu;
        m.std[j] = std::max(std::sqrt(ss / static_cast<double>(n)), eps);
    }
    return m;
}

Var standardize_columns(Var a, double eps, ColumnMoments* moments) {
    const Tensor& av = a.value();
    ColumnMoments m = column_moments(av, eps);
    const std::size_t n = av.dim(0), k = av.dim(1);
    Tensor y(av.shape());
    std::vector<bool> floored(k);
    for (std::size_t j = 0; j < k; ++j) {
        // Floored columns are exactly constant or nearly so; treat them as such.
        floored[j] = m.std[j] <= eps;
        for (std::size_t i = 0; i < n; ++i) y.at(i, j) = (av.at(i, j) - m.mean[j]) / m.std[j];
    }
    if (moments) *moments = m;
    const std::size_t ia = a.id();
    Tensor y_copy = y;
    return a.tape().record(
        std::move(y), {ia},
        [ia, y = std::move(y_copy), sd = m.std, floored = std::move(floored)](Tape& t, const Tensor& g) {
            Tensor* ga = t.grad_target(ia);
            if (!ga) return;
            const std::size_t n = y.dim(0), k = y.dim(1);
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t j = 0; j < k; ++j) {
                double gmean = 0.0, gy = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    gmean += g.at(i, j);
                    gy += g.at(i, j) * y.at(i, j);
                }
                gmean *= inv_n;
                gy *= inv_n;
                if (floored[j]) gy = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    ga->at(i, j) += (g.at(i, j) - gmean - y.at(i, j) * gy) / sd[j];
                }
            }
        });
}

Var shift_scale_columns(Var a, const std::vector<double>& mean, const std::vector<double>& std) {
    const Tensor& av = a.value();
    require_rank(av, 2, "shift_scale_columns");
    const std::size_t n = av.dim(0), k = av.dim(1);
    if (mean.size() != k || std.size() != k) throw DimensionError("shift_scale_columns: statistics size mismatch");
    Tensor y(av.shape());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) y.at(i, j) = (av.at(i, j) - mean[j]) / std[j];
    }
    const std::size_t ia = a.id();
    return a.tape().record(std::move(y), {ia}, [ia, std](Tape& t, const Tensor& g) {
        Tensor* ga = t.grad_target(ia);
        if (!ga) return;
        const std::size_t n = g.dim(0), k = g.dim(1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) ga->at(i, j) += g.at(i, j) / std[j];
        }
    });
}

}  // namespace neuromix
